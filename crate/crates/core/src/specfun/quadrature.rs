use crate::Real;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

pub const DEFAULT_ORDER: usize = 256;

impl<T: Real> QuadratureRule<T> {
    /// `n`-point Gauss-Legendre rule; nodes by Newton iteration on P_n.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "quadrature order must be positive");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        let m = n.div_ceil(2);
        for i in 0..m {
            // Work in f64 regardless of T; the f32 rule is a rounding of the f64 one.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::c(-x);
            nodes[n - 1 - i] = T::c(x);
            weights[i] = T::c(w);
            weights[n - 1 - i] = T::c(w);
        }
        QuadratureRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// ∫_a^b f.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::c(0.5);
        let mid = (b + a) * T::c(0.5);
        let mut sum = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum = sum + w * f(mid + half * x);
        }
        sum * half
    }
}

/// Legendre P_n(x) and its derivative via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// ∫_a^b f, doubling the Gauss-Legendre order from `DEFAULT_ORDER` until two
/// successive estimates agree to `rel_tol` (relative to max(1, |I|)).
///
/// Returns the last estimate and whether the agreement test was met.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> T>(
    a: T,
    b: T,
    rel_tol: T,
    mut f: F,
) -> (T, bool) {
    let mut order = DEFAULT_ORDER;
    let mut prev = QuadratureRule::gauss_legendre(order).integrate(a, b, &mut f);
    while order < 16_384 {
        order *= 2;
        let next = QuadratureRule::gauss_legendre(order).integrate(a, b, &mut f);
        if (next - prev).abs() <= rel_tol * next.abs().max(T::one()) {
            return (next, true);
        }
        prev = next;
    }
    (prev, false)
}

/// ∫_{S^{p-1}} g(μᵀx) dx for a zonal function g, computed as
/// ω_{p-2} ∫_0^π g(cos θ) sin^{p-2} θ dθ so the integrand stays smooth at t = ±1.
pub fn integrate_zonal<T: Real, F: FnMut(T) -> T>(
    rule: &QuadratureRule<T>,
    p: usize,
    mut g: F,
) -> T {
    let area = super::sphere_area::<T>(p - 1);
    let expo = (p - 2) as i32;
    area * rule.integrate(T::zero(), T::PI(), |theta| {
        g(theta.cos()) * theta.sin().powi(expo)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 64, 256, 1024] {
            let rule = QuadratureRule::<f64>::gauss_legendre(n);
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-12, "n={n} sum={s}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().iter().all(|&x| x > -1.0 && x < 1.0));
        }
    }

    #[test]
    fn exact_for_monomials() {
        for n in [3usize, 8, 20] {
            let rule = QuadratureRule::<f64>::gauss_legendre(n);
            for k in 0..=(2 * n - 1) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                let err = (got - exact).abs();
                assert!(err <= 1e-12 * exact.abs().max(1.0), "n={n} k={k} err={err}");
            }
        }
    }

    #[test]
    fn adaptive_converges() {
        let (v, ok) = integrate_adaptive(0.0f64, 1.0, 1e-12, |x| (10.0 * x).exp());
        assert!(ok);
        let exact = ((10.0f64).exp() - 1.0) / 10.0;
        assert!((v - exact).abs() / exact < 1e-13);
    }

    #[test]
    fn sphere_areas_from_zonal_integral() {
        let rule = QuadratureRule::<f64>::gauss_legendre(128);
        for p in 2..=7 {
            let area = integrate_zonal(&rule, p, |_| 1.0);
            let expected = crate::specfun::sphere_area::<f64>(p);
            assert!((area - expected).abs() < 1e-12 * expected, "p={p}");
        }
    }
}
