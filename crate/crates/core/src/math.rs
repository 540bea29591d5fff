//! Small numeric kernels shared by the trainers.

/// Logits and dot products are clamped to this magnitude before exponentiation.
pub const LOGIT_CLAMP: f64 = 30.0;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Logistic function, clamped to ±[`LOGIT_CLAMP`] and evaluated with the
/// sign-split form so neither branch overflows.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log σ(x)` without the clamp, stable for large |x|.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Binary cross-entropy of a logit against a 0/1 target.
#[inline]
pub fn bce_with_logit(logit: f64, target: f64) -> f64 {
    // -[y log σ(z) + (1-y) log σ(-z)]
    -(target * log_sigmoid(logit) + (1.0 - target) * log_sigmoid(-logit))
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_at_zero_is_half() {
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn sigmoid_clamps_but_never_saturates() {
        let hi = sigmoid(1e9);
        assert!(hi < 1.0 && hi >= 1.0 - 1e-13);
        let lo = sigmoid(-1e9);
        assert!(lo > 0.0 && lo <= 1e-13);
        assert_eq!(sigmoid(1e9), sigmoid(LOGIT_CLAMP));
    }

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!(log_sigmoid(800.0).abs() < 1e-300);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn bce_matches_naive_form() {
        for &(z, y) in &[(0.3f64, 1.0), (-1.2, 0.0), (2.5, 0.0), (-0.1, 1.0)] {
            let p: f64 = 1.0 / (1.0 + (-z).exp());
            let naive = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
            assert!((bce_with_logit(z, y) - naive).abs() < 1e-12);
        }
    }
}
