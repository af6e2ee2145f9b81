use crate::{Error, Result};

/// Step-size schedules `phi(n) = n^(-phi_exp)` for the surrogate and
/// `pi(n) = pi_c / (pi_c + n)` for the iterate averaging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedules {
    pub phi_exp: f64,
    pub pi_c: f64,
}

impl Default for Schedules {
    fn default() -> Self {
        Self {
            phi_exp: 0.9,
            pi_c: 1000.0,
        }
    }
}

impl Schedules {
    pub fn phi(&self, n: usize) -> f64 {
        (n.max(1) as f64).powf(-self.phi_exp)
    }

    pub fn pi(&self, n: usize) -> f64 {
        self.pi_c / (self.pi_c + n as f64)
    }
}

/// Running surrogate of the stochastic objective at the current iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateState {
    /// Number of samples absorbed so far.
    pub n: usize,
    pub a: Vec<f64>,
    pub g_val: f64,
    pub g_grad: Vec<f64>,
}

impl SurrogateState {
    pub fn new(a: Vec<f64>) -> Self {
        let n_ue = a.len();
        Self {
            n: 0,
            a,
            g_val: 0.0,
            g_grad: vec![0.0; n_ue],
        }
    }
}

/// `T(a) = q a's / a'1` and its gradient, where `s` is the sum of the
/// three one-hot time vectors of the sampled state.
pub fn sample_t_and_grad(a: &[f64], onehot_sum: &[f64], q: f64) -> Result<(f64, Vec<f64>)> {
    if a.len() != onehot_sum.len() {
        return Err(Error::Dimension(format!(
            "selection of {} vs one-hot of {}",
            a.len(),
            onehot_sum.len()
        )));
    }
    let sum: f64 = a.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::Domain("objective sample needs sum(a) > 0".into()));
    }
    let as_: f64 = a.iter().zip(onehot_sum).map(|(x, s)| x * s).sum();
    let val = q * as_ / sum;
    let grad = onehot_sum
        .iter()
        .map(|s| q * (s * sum - as_) / (sum * sum))
        .collect();
    Ok((val, grad))
}

/// `g <- (1 - phi) g + phi T`, and likewise for the gradient.
pub fn update_surrogate(state: &mut SurrogateState, t_val: f64, t_grad: &[f64], phi: f64) {
    assert!(phi > 0.0 && phi <= 1.0, "surrogate weight {phi} outside (0, 1]");
    state.n += 1;
    state.g_val = (1.0 - phi) * state.g_val + phi * t_val;
    for (g, t) in state.g_grad.iter_mut().zip(t_grad) {
        *g = (1.0 - phi) * *g + phi * t;
    }
}

/// `V(a) = sum_k (a_k - a_k^2)` and `lambda * grad V = lambda (1 - 2a)`.
pub fn penalty_value_and_grad(a: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let v = a.iter().map(|x| x - x * x).sum();
    (v, a.iter().map(|x| lambda * (1.0 - 2.0 * x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn schedule_conditions() {
        let s = Schedules::default();
        assert_eq!(s.phi(1), 1.0);
        assert!((s.pi(0) - 1.0).abs() < 1e-15);
        // pi/phi ~ pi_c n^(phi_exp - 1) peaks at n = phi_exp pi_c / (1 - phi_exp)
        // = 9000 and decreases to zero after that, slowly.
        let ratio = |n: f64| s.pi_c / (s.pi_c + n) * n.powf(s.phi_exp);
        assert!(ratio(8000.0) < ratio(9000.0) && ratio(10000.0) < ratio(9000.0));
        let mut prev = ratio(9000.0);
        for k in 4..=30 {
            let r = ratio(10f64.powi(k));
            assert!(r < prev, "10^{k}");
            prev = r;
        }
        assert!(ratio(1e60) < 1e-2);
        // sum phi^2 converges (exponent 1.8 > 1); sum pi diverges like log n.
        let sq: f64 = (1..200_000).map(|n| s.phi(n).powi(2)).sum();
        let tail: f64 = (200_000..400_000).map(|n| s.phi(n).powi(2)).sum();
        assert!(tail < 1e-3 * sq);
        let p1: f64 = (1..10_000).map(|n| s.pi(n)).sum();
        let p2: f64 = (1..100_000).map(|n| s.pi(n)).sum();
        assert!(p2 - p1 > 1000.0);
    }

    #[test]
    fn zero_onehots_give_zero() {
        let (t, g) = sample_t_and_grad(&[0.3, 0.7], &[0.0, 0.0], 90.0).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn full_selection_value() {
        let s = [0.0, 2.0, 0.5, 0.0];
        let (t, _) = sample_t_and_grad(&[1.0; 4], &s, 90.0).unwrap();
        assert!((t - 90.0 * 2.5 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn empty_selection_errors() {
        assert!(sample_t_and_grad(&[0.0, 0.0], &[1.0, 1.0], 90.0).is_err());
    }

    #[test]
    fn first_update_copies_sample() {
        let mut st = SurrogateState::new(vec![0.5; 3]);
        let s = Schedules::default();
        update_surrogate(&mut st, 7.0, &[1.0, -2.0, 3.0], s.phi(1));
        assert_eq!(st.g_val, 7.0);
        assert_eq!(st.g_grad, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn constant_samples_converge_monotonically() {
        let mut st = SurrogateState::new(vec![0.5; 1]);
        let s = Schedules { phi_exp: 0.9, pi_c: 1000.0 };
        st.g_val = 10.0;
        st.n = 1;
        let mut prev = (st.g_val - 3.0).abs();
        for n in 2..200 {
            update_surrogate(&mut st, 3.0, &[0.0], s.phi(n));
            let d = (st.g_val - 3.0).abs();
            assert!(d <= prev);
            prev = d;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn recursion_matches_unrolled_form() {
        let s = Schedules::default();
        let samples: Vec<f64> = (1..=12).map(|i| (i as f64 * 1.7).sin() * 5.0 + 6.0).collect();
        let mut st = SurrogateState::new(vec![0.0]);
        for (i, t) in samples.iter().enumerate() {
            update_surrogate(&mut st, *t, &[*t], s.phi(i + 1));
        }
        // g_K = sum_j phi_j T_j prod_{i>j} (1 - phi_i)
        let k = samples.len();
        let explicit: f64 = (1..=k)
            .map(|j| {
                let tail: f64 = (j + 1..=k).map(|i| 1.0 - s.phi(i)).product();
                s.phi(j) * samples[j - 1] * tail
            })
            .sum();
        assert!((st.g_val - explicit).abs() < 1e-12 * explicit.abs());
        assert!((st.g_grad[0] - explicit).abs() < 1e-12 * explicit.abs());
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty_value_and_grad(&[0.0, 1.0, 1.0, 0.0], 1.0).0, 0.0);
        let (v, g) = penalty_value_and_grad(&[0.5; 8], 1.0);
        assert!((v - 2.0).abs() < 1e-15);
        assert!(g.iter().all(|x| *x == 0.0));
    }

    proptest! {
        #[test]
        fn objective_gradient_matches_differences(
            a in proptest::collection::vec(0.05f64..1.0, 2..8),
            seed in 0u64..1000,
        ) {
            let n = a.len();
            let s: Vec<f64> = (0..n).map(|k| if (seed >> k) & 1 == 1 { 1.0 + k as f64 } else { 0.0 }).collect();
            let (_, g) = sample_t_and_grad(&a, &s, 90.0).unwrap();
            let h = 1e-6;
            for k in 0..n {
                let mut ap = a.clone();
                ap[k] += h;
                let mut am = a.clone();
                am[k] -= h;
                let fd = (sample_t_and_grad(&ap, &s, 90.0).unwrap().0 - sample_t_and_grad(&am, &s, 90.0).unwrap().0) / (2.0 * h);
                let scale = g.iter().map(|x| x.abs()).fold(1e-9, f64::max);
                prop_assert!((fd - g[k]).abs() <= 1e-4 * scale, "{} vs {}", fd, g[k]);
            }
        }

        #[test]
        fn penalty_gradient_matches_differences(a in proptest::collection::vec(0.0f64..1.0, 1..10)) {
            let (_, g) = penalty_value_and_grad(&a, 1.0);
            let h = 1e-6;
            for k in 0..a.len() {
                let mut ap = a.clone();
                ap[k] += h;
                let mut am = a.clone();
                am[k] -= h;
                let fd = (penalty_value_and_grad(&ap, 1.0).0 - penalty_value_and_grad(&am, 1.0).0) / (2.0 * h);
                prop_assert!((fd - g[k]).abs() < 1e-6);
            }
        }
    }
}
