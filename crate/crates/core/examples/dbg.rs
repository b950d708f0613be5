use geodrec::Expr;
fn main() {
    let r = Expr::coord("r");
    let f = Expr::sub2(Expr::one(), Expr::div2(Expr::int(2), r.clone()));
    let integrand = Expr::mul2(
        Expr::mul2(Expr::int(2), Expr::powi(r, -2)),
        Expr::powi(f.clone(), -1),
    );
    println!("integrand = {}", integrand);
    println!("res = {:?}", integrand.integrate("r").map(|e| e.to_string()));
    println!("df = {}", f.diff("r"));
}
