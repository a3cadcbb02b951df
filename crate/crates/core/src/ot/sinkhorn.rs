//! Entropic optimal transport by alternating diagonal scaling.
//!
//! The plain solver follows the textbook update
//! `psi <- nu / (K^T phi)`, `phi <- mu / (K psi)` with `K = exp(-C / eps)`.
//! For small `eps` the kernel underflows, so a log-domain variant working on
//! the dual potentials `f = eps log phi`, `g = eps log psi` is available
//! through [`SinkhornConfig::log_domain`]. It anneals `eps` down from the
//! cost range, which keeps small targets from stalling.

use ndarray::{Array1, Array2, Axis};

use super::OtError;

/// Tolerance on `sum(mu) - sum(nu)`.
const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Stop once the L1 column-marginal violation drops to this value.
    pub tol: f64,
    pub log_domain: bool,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig {
            epsilon: 0.05,
            max_iter: 1000,
            tol: 1e-9,
            log_domain: false,
        }
    }
}

impl SinkhornConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn stabilized(mut self) -> Self {
        self.log_domain = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct OtResult {
    pub coupling: Array2<f64>,
    /// `<C, coupling>`.
    pub transport_cost: f64,
    pub iterations_used: usize,
    /// L1 norm of `coupling^T 1 - nu` at exit. Row marginals are exact after
    /// the last `phi` update, so this is the whole marginal violation.
    pub marginal_residual: f64,
    /// Residual after every iteration.
    pub residual_history: Vec<f64>,
}

fn validate(c: &Array2<f64>, mu: &[f64], nu: &[f64], cfg: &SinkhornConfig) -> Result<(), OtError> {
    let (n1, n2) = c.dim();
    if mu.len() != n1 || nu.len() != n2 {
        return Err(OtError::Shape {
            rows: n1,
            cols: n2,
            mu: mu.len(),
            nu: nu.len(),
        });
    }
    if !(cfg.epsilon > 0.0 && cfg.epsilon.is_finite()) {
        return Err(OtError::Epsilon(cfg.epsilon));
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(OtError::NonFiniteCost);
    }
    if mu.iter().chain(nu).any(|&m| !(m >= 0.0 && m.is_finite())) {
        return Err(OtError::NegativeMass);
    }
    let (sm, sn) = (mu.iter().sum::<f64>(), nu.iter().sum::<f64>());
    if (sm - sn).abs() > MASS_TOL {
        return Err(OtError::MassMismatch(sm, sn));
    }
    Ok(())
}

fn column_residual(coupling: &Array2<f64>, nu: &[f64]) -> f64 {
    coupling
        .sum_axis(Axis(0))
        .iter()
        .zip(nu)
        .map(|(s, t)| (s - t).abs())
        .sum()
}

fn finish(c: &Array2<f64>, coupling: Array2<f64>, iters: usize, history: Vec<f64>) -> OtResult {
    let transport_cost = (c * &coupling).sum();
    OtResult {
        coupling,
        transport_cost,
        iterations_used: iters,
        marginal_residual: history.last().copied().unwrap_or(0.0),
        residual_history: history,
    }
}

/// Entropic OT between `mu` and `nu` under cost `c`.
///
/// Masses may be zero (the extended solver uses a zero-mass dummy row when
/// both sides have equal size) but must agree in total.
pub fn sinkhorn(
    c: &Array2<f64>,
    mu: &[f64],
    nu: &[f64],
    cfg: &SinkhornConfig,
) -> Result<OtResult, OtError> {
    validate(c, mu, nu, cfg)?;
    if c.is_empty() {
        return Ok(finish(c, c.clone(), 0, vec![0.0]));
    }
    if cfg.log_domain {
        sinkhorn_log(c, mu, nu, cfg)
    } else {
        sinkhorn_plain(c, mu, nu, cfg)
    }
}

fn sinkhorn_plain(
    c: &Array2<f64>,
    mu: &[f64],
    nu: &[f64],
    cfg: &SinkhornConfig,
) -> Result<OtResult, OtError> {
    let eps = cfg.epsilon;
    let k = c.mapv(|x| (-x / eps).exp());
    let mu = Array1::from(mu.to_vec());
    let nu_arr = Array1::from(nu.to_vec());
    let mut phi = Array1::<f64>::ones(c.nrows());
    let mut psi = Array1::<f64>::ones(c.ncols());
    let mut history = Vec::new();

    let unstable = |d: &Array1<f64>, target: &Array1<f64>| {
        d.iter()
            .zip(target)
            .any(|(&x, &t)| t > 0.0 && !(x > 0.0 && x.is_finite()))
    };
    let mut iters = 0;
    while iters < cfg.max_iter {
        iters += 1;
        let kt_phi = k.t().dot(&phi);
        if unstable(&kt_phi, &nu_arr) {
            return Err(OtError::Unstable { epsilon: eps });
        }
        psi = safe_div(&nu_arr, &kt_phi);
        let k_psi = k.dot(&psi);
        if unstable(&k_psi, &mu) {
            return Err(OtError::Unstable { epsilon: eps });
        }
        phi = safe_div(&mu, &k_psi);

        // Column sums of diag(phi) K diag(psi) without forming the plan.
        let col = k.t().dot(&phi) * &psi;
        let residual: f64 = col.iter().zip(nu).map(|(s, t)| (s - t).abs()).sum();
        history.push(residual);
        if !residual.is_finite() {
            return Err(OtError::Unstable { epsilon: eps });
        }
        if residual <= cfg.tol {
            break;
        }
    }
    let coupling = Array2::from_shape_fn(c.dim(), |(i, j)| phi[i] * k[[i, j]] * psi[j]);
    if history.is_empty() {
        history.push(column_residual(&coupling, nu));
    }
    Ok(finish(c, coupling, iters, history))
}

/// Zero numerators give zero regardless of the denominator.
fn safe_div(num: &Array1<f64>, den: &Array1<f64>) -> Array1<f64> {
    Array1::from_shape_fn(
        num.len(),
        |i| {
            if num[i] == 0.0 {
                0.0
            } else {
                num[i] / den[i]
            }
        },
    )
}

/// `log(sum(exp(xs)))` that tolerates `-inf` entries.
fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Ratio between consecutive regularization levels when annealing.
const ANNEAL_FACTOR: f64 = 0.5;

/// Log-domain iterations with epsilon scaling: the potentials are first
/// relaxed at a regularization comparable to the cost range, which is then
/// halved stage by stage down to `cfg.epsilon`. Intermediate stages stop at a
/// loose residual; only the last one uses `cfg.tol`. The fixed point is that
/// of the target epsilon, reached in far fewer iterations when it is small.
fn sinkhorn_log(
    c: &Array2<f64>,
    mu: &[f64],
    nu: &[f64],
    cfg: &SinkhornConfig,
) -> Result<OtResult, OtError> {
    let target = cfg.epsilon;
    let (n1, n2) = c.dim();
    let log_mu: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
    let log_nu: Vec<f64> = nu.iter().map(|m| m.ln()).collect();
    let mut f = vec![0.0; n1];
    let mut g = vec![0.0; n2];
    let mut history = Vec::new();
    let mut buf = vec![0.0; n1.max(n2)];

    let plan_entry = |f: &[f64], g: &[f64], eps: f64, i: usize, j: usize| -> f64 {
        if f[i] == f64::NEG_INFINITY || g[j] == f64::NEG_INFINITY {
            0.0
        } else {
            ((f[i] + g[j] - c[[i, j]]) / eps).exp()
        }
    };

    let (lo, hi) = c
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let mut eps = (hi - lo).max(target);
    let mut iters = 0;
    loop {
        let last = eps <= target;
        let stage_tol = if last {
            cfg.tol
        } else {
            cfg.tol.max(1e-3 * mu.iter().sum::<f64>())
        };
        while iters < cfg.max_iter {
            iters += 1;
            for j in 0..n2 {
                if nu[j] == 0.0 {
                    g[j] = f64::NEG_INFINITY;
                    continue;
                }
                for i in 0..n1 {
                    buf[i] = (f[i] - c[[i, j]]) / eps;
                }
                let lse = log_sum_exp(buf[..n1].iter().copied());
                if !lse.is_finite() {
                    return Err(OtError::Unstable { epsilon: eps });
                }
                g[j] = eps * (log_nu[j] - lse);
            }
            for i in 0..n1 {
                if mu[i] == 0.0 {
                    f[i] = f64::NEG_INFINITY;
                    continue;
                }
                for j in 0..n2 {
                    buf[j] = (g[j] - c[[i, j]]) / eps;
                }
                let lse = log_sum_exp(buf[..n2].iter().copied());
                if !lse.is_finite() {
                    return Err(OtError::Unstable { epsilon: eps });
                }
                f[i] = eps * (log_mu[i] - lse);
            }
            let residual: f64 = (0..n2)
                .map(|j| {
                    ((0..n1).map(|i| plan_entry(&f, &g, eps, i, j)).sum::<f64>() - nu[j]).abs()
                })
                .sum();
            history.push(residual);
            if residual <= stage_tol {
                break;
            }
        }
        if last || iters >= cfg.max_iter {
            break;
        }
        eps = (eps * ANNEAL_FACTOR).max(target);
    }
    let coupling = Array2::from_shape_fn((n1, n2), |(i, j)| plan_entry(&f, &g, eps, i, j));
    if history.is_empty() {
        history.push(column_residual(&coupling, nu));
    }
    Ok(finish(c, coupling, iters, history))
}

/// Entropic OT for an `n1 x n2` cost with `n1 <= n2`, where every row must be
/// fully matched and columns may stay partly unmatched.
///
/// A zero-cost dummy row with mass `n2 - n1` absorbs the surplus column mass;
/// it is removed from the returned coupling, whose rows then each sum to one
/// and whose columns sum to at most one.
pub fn extended_sinkhorn(c: &Array2<f64>, cfg: &SinkhornConfig) -> Result<OtResult, OtError> {
    let (n1, n2) = c.dim();
    if n1 > n2 {
        return Err(OtError::TooManyRows { rows: n1, cols: n2 });
    }
    let mut ext = Array2::zeros((n1 + 1, n2));
    ext.slice_mut(ndarray::s![..n1, ..]).assign(c);
    let mut mu = vec![1.0; n1 + 1];
    mu[n1] = (n2 - n1) as f64;
    let nu = vec![1.0; n2];
    let full = sinkhorn(&ext, &mu, &nu, cfg)?;
    let coupling = full.coupling.slice(ndarray::s![..n1, ..]).to_owned();
    Ok(OtResult {
        transport_cost: (c * &coupling).sum(),
        coupling,
        iterations_used: full.iterations_used,
        marginal_residual: full.marginal_residual,
        residual_history: full.residual_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn tight() -> SinkhornConfig {
        SinkhornConfig {
            max_iter: 100_000,
            tol: 1e-13,
            ..SinkhornConfig::default()
        }
    }

    #[test]
    fn zero_cost_gives_uniform_plan() {
        let c = Array2::zeros((3, 3));
        let r = sinkhorn(&c, &[1.0; 3], &[1.0; 3], &SinkhornConfig::default()).unwrap();
        for &x in r.coupling.iter() {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(r.transport_cost, 0.0);
    }

    #[test]
    fn antidiagonal_cost_concentrates_on_identity() {
        // Feasible plans are [[a, 1-a], [1-a, a]]; the regularized objective
        // 2(1-a) + eps * H has its minimum at a = 1/(1 + exp(-1/eps)), which
        // at eps = 0.05 differs from 1 by ~2e-9.
        let c = array![[0.0, 1.0], [1.0, 0.0]];
        let r = sinkhorn(&c, &[1.0, 1.0], &[1.0, 1.0], &tight()).unwrap();
        let a = 1.0 / (1.0 + (-1.0f64 / 0.05).exp());
        assert!((r.coupling[[0, 0]] - a).abs() < 1e-9);
        assert!((r.coupling[[0, 0]] - 1.0).abs() < 1e-6);
        assert!((r.coupling[[1, 1]] - 1.0).abs() < 1e-6);
        assert!(r.coupling[[0, 1]] < 1e-6);
    }

    #[test]
    fn large_epsilon_approaches_product_plan() {
        let c = array![[0.3, 2.0, 1.0], [1.5, 0.0, 0.7]];
        let mu = [1.0, 2.0];
        let nu = [0.5, 1.5, 1.0];
        let cfg = SinkhornConfig::default().with_epsilon(1e3);
        let r = sinkhorn(&c, &mu, &nu, &cfg).unwrap();
        for (i, m) in mu.iter().enumerate() {
            for (j, n) in nu.iter().enumerate() {
                assert!((r.coupling[[i, j]] - m * n / 3.0).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn argument_errors() {
        let c = Array2::zeros((2, 2));
        let cfg = SinkhornConfig::default();
        assert!(matches!(
            sinkhorn(&c, &[1.0, 1.0], &[1.0, 2.0], &cfg),
            Err(OtError::MassMismatch(..))
        ));
        assert!(matches!(
            sinkhorn(&c, &[1.0, 1.0], &[1.0, 1.0], &cfg.with_epsilon(0.0)),
            Err(OtError::Epsilon(_))
        ));
        assert!(matches!(
            sinkhorn(&c, &[2.0], &[1.0, 1.0], &cfg),
            Err(OtError::Shape { .. })
        ));
    }

    #[test]
    fn underflow_is_reported_and_log_domain_recovers() {
        // exp(-1000 / 0.05) underflows to zero in the whole first row.
        let c = array![[1000.0, 1000.0], [0.0, 0.05]];
        let cfg = SinkhornConfig::default();
        assert!(matches!(
            sinkhorn(&c, &[1.0, 1.0], &[1.0, 1.0], &cfg),
            Err(OtError::Unstable { .. })
        ));
        let r = sinkhorn(&c, &[1.0, 1.0], &[1.0, 1.0], &cfg.stabilized()).unwrap();
        assert!(r.marginal_residual < 1e-9);
        assert!(r.transport_cost > 1000.0 && r.transport_cost < 1000.05);
    }

    #[test]
    fn log_domain_matches_plain() {
        let c = array![[0.2, 0.9, 0.4], [0.6, 0.1, 0.8], [0.5, 0.3, 0.0]];
        let p = sinkhorn(&c, &[1.0; 3], &[1.0; 3], &tight()).unwrap();
        let l = sinkhorn(&c, &[1.0; 3], &[1.0; 3], &tight().stabilized()).unwrap();
        for (a, b) in p.coupling.iter().zip(l.coupling.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn extended_equal_sizes_is_plain_sinkhorn() {
        let c = array![[0.2, 0.9, 0.4], [0.6, 0.1, 0.8], [0.5, 0.3, 0.0]];
        let direct = sinkhorn(&c, &[1.0; 3], &[1.0; 3], &tight()).unwrap();
        let ext = extended_sinkhorn(&c, &tight()).unwrap();
        assert_eq!(ext.coupling.dim(), (3, 3));
        for (a, b) in direct.coupling.iter().zip(ext.coupling.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!((direct.transport_cost - ext.transport_cost).abs() < 1e-9);
    }

    #[test]
    fn extended_dummy_absorbs_expensive_column() {
        // Feasible set: real row [t, 1-t], dummy row [1-t, t]; cost 5(1-t).
        // The minimizer over the enumerated grid is t = 1.
        let c = array![[0.0, 5.0]];
        let r = extended_sinkhorn(&c, &tight()).unwrap();
        assert!((r.coupling[[0, 0]] - 1.0).abs() < 1e-9);
        assert!(r.coupling[[0, 1]] < 1e-9);
        let best_t = (0..=1000)
            .map(|s| s as f64 / 1000.0)
            .min_by(|a, b| (5.0 * (1.0 - a)).total_cmp(&(5.0 * (1.0 - b))))
            .unwrap();
        assert!((r.coupling[[0, 0]] - best_t).abs() < 1e-6);
    }

    #[test]
    fn extended_zero_cost_spreads_evenly() {
        let c = Array2::zeros((2, 3));
        let r = extended_sinkhorn(&c, &tight()).unwrap();
        for row in r.coupling.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-9);
        }
        for col in r.coupling.columns() {
            assert!((col.sum() - 2.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn extended_rejects_tall_costs() {
        let c = Array2::zeros((3, 2));
        assert!(matches!(
            extended_sinkhorn(&c, &SinkhornConfig::default()),
            Err(OtError::TooManyRows { .. })
        ));
    }
}
