//! The progress metric that drives termination.

use crate::error::{Error, Result};

/// Population standard deviation: sqrt( (1/N) * sum (v_i - mean)^2 ).
///
/// The window length is fixed by the caller, so the population form (divide
/// by N) keeps the metric independent of any sample-correction convention.
pub fn population_std(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("population_std needs at least one value"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt())
}

/// The halting metric pi_k.
///
/// Before the window fills (k < k0) it is the gradient norm alone; afterwards
/// it is the larger of the gradient norm and the standard deviation of the
/// most recent k0+1 objective values f_k, ..., f_{k-k0}.
///
/// `f_history` holds f_0, ..., f_k in iteration order.
pub fn halting_metric(f_history: &[f64], grad_norm: f64, k: usize, k0: usize) -> f64 {
    if k < k0 {
        return grad_norm;
    }
    debug_assert!(f_history.len() > k, "f_history must hold f_0..f_k");
    let window = &f_history[k - k0..=k];
    let std = population_std(window).expect("window is non-empty");
    std.max(grad_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn std_of_constant_sequence_is_zero() {
        assert_eq!(population_std(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn std_of_two_points() {
        assert_eq!(population_std(&[0.0, 2.0]).unwrap(), 1.0);
    }

    #[test]
    fn std_matches_direct_formula() {
        // mean 2.5, squared deviations (2.25, 0.25, 0.25, 2.25), variance 1.25
        let got = population_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_relative_eq!(got, 1.25f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(got, 1.118033988749895, epsilon = 1e-12);
    }

    #[test]
    fn std_rejects_empty_input() {
        assert!(population_std(&[]).is_err());
    }

    #[test]
    fn metric_below_window_returns_grad_norm() {
        let hist = [9.0, 8.0, 7.0];
        assert_eq!(halting_metric(&hist, 0.7, 2, 5), 0.7);
    }

    #[test]
    fn metric_with_flat_window_returns_grad_norm() {
        let hist = [3.0; 6];
        assert_eq!(halting_metric(&hist, 0.2, 5, 5), 0.2);
    }

    #[test]
    fn metric_takes_std_of_recent_window() {
        // Window [6,5,4,3,2,1]: variance 17.5/6, std ~ 1.70783.
        let hist = [100.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0];
        let got = halting_metric(&hist, 0.1, 6, 5);
        assert_relative_eq!(got, (17.5f64 / 6.0).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(got, 1.707825127659933, epsilon = 1e-12);
    }

    #[test]
    fn metric_is_monotone_in_grad_norm() {
        let hist = [5.0, 4.0, 3.0, 2.5, 2.25, 2.125];
        let mut last = 0.0;
        for i in 0..20 {
            let g = i as f64 * 0.5;
            let pi = halting_metric(&hist, g, 5, 5);
            assert!(pi >= last);
            last = pi;
        }
    }
}
