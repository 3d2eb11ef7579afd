use super::Expr;

pub(super) fn diff(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) => Expr::real(0.0),
        Expr::Z => Expr::real(1.0),
        Expr::Add(a, b) => Expr::add(diff(a), diff(b)),
        Expr::Sub(a, b) => Expr::sub(diff(a), diff(b)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(diff(a), (**b).clone()),
            Expr::mul((**a).clone(), diff(b)),
        ),
        Expr::Div(a, b) => Expr::div(
            Expr::sub(
                Expr::mul(diff(a), (**b).clone()),
                Expr::mul((**a).clone(), diff(b)),
            ),
            Expr::pow((**b).clone(), 2),
        ),
        Expr::Pow(a, n) => Expr::mul(
            Expr::mul(Expr::real(f64::from(*n)), Expr::pow((**a).clone(), n - 1)),
            diff(a),
        ),
        Expr::Exp(a) => Expr::mul(e.clone(), diff(a)),
        Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), diff(a))),
        Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), diff(a)),
        // d sqrt(a) = a' / (2 sqrt(a))
        Expr::Sqrt(a) => Expr::div(diff(a), Expr::mul(Expr::real(2.0), e.clone())),
    }
}
