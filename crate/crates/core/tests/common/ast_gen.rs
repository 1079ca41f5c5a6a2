use num_rational::Ratio;
use rand::Rng;
use scalebridge::dsl::Expr;

const SYMBOLS: [&str; 8] = ["x", "y", "m_pi", "hbar", "G", "c", "L2", "_k"];

/// Random expression of depth at most `max_depth` (a leaf has depth 1).
pub fn random_expr<R: Rng>(rng: &mut R, max_depth: usize) -> Expr {
    if max_depth <= 1 || rng.random_bool(0.2) {
        return if rng.random_bool(0.5) {
            Expr::symbol(SYMBOLS[rng.random_range(0..SYMBOLS.len())])
        } else {
            let mantissa = match rng.random_range(0..4) {
                0 => 0,
                1 => rng.random_range(1..10),
                _ => rng.random_range(1..1_000_000_000u64),
            };
            Expr::literal(mantissa, rng.random_range(-40..40))
        };
    }
    let d = max_depth - 1;
    match rng.random_range(0..6) {
        0 => Expr::sum(random_expr(rng, d), random_expr(rng, d)),
        1 => Expr::difference(random_expr(rng, d), random_expr(rng, d)),
        2 => Expr::product(random_expr(rng, d), random_expr(rng, d)),
        3 => Expr::quotient(random_expr(rng, d), random_expr(rng, d)),
        4 => {
            let r = Ratio::new(rng.random_range(-6..=6), rng.random_range(1..=4));
            Expr::power(random_expr(rng, d), r)
        }
        _ => Expr::negate(random_expr(rng, d)),
    }
}
