//! Named numerical checks, one per structural identity of the sub-Bergman
//! spaces, with deterministic seeded sample corpora.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs_entry, CMatrix};
use crate::moments::delta_min;
use crate::operators::{
    defect_b, defect_bbar, min_eigenvalue, psd_sqrt, toeplitz_analytic, PsdFactorization, DEFAULT_RANK_TOL,
};
use crate::spaces::{
    apply_sb, density_approximate, gram_ab2, pointwise_identity_check, project_onto_mn_perp, KernelPoint,
    SbContext, SbMatrix, DEFAULT_GRAM_TOL, KERNEL_POINT_RADIUS,
};
use crate::symbols::{PolynomialVector, SymbolSpec, DEFAULT_SUP_GRID};

pub const DEFAULT_SEED: u64 = 0xB17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub eig_tol: f64,
    pub norm_rel_tol: f64,
    pub exact_tol: f64,
    /// Section size `N` for Toeplitz and defect matrices.
    pub section_size: usize,
    /// Gram size `M` for `A_b²` computations.
    pub gram_size: usize,
    pub seed: u64,
    /// Number of random polynomials per sample-based check.
    pub samples: usize,
    pub max_sample_degree: usize,
    /// `k` values for the tail distance bound.
    pub distance_ks: Vec<usize>,
    /// `r` values for the tail distance bound.
    pub distance_radii: Vec<f64>,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            eig_tol: 1e-10,
            norm_rel_tol: 1e-6,
            exact_tol: 1e-10,
            section_size: 96,
            gram_size: 96,
            seed: DEFAULT_SEED,
            samples: 20,
            max_sample_degree: 12,
            distance_ks: vec![0, 1, 3],
            distance_radii: vec![0.3, 0.5, 0.8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub symbol: String,
    pub parameters: BTreeMap<String, String>,
    pub measured: f64,
    pub bound_or_target: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
}

impl CheckReport {
    /// `k=v` pairs joined with `;`.
    pub fn parameter_string(&self) -> String {
        self.parameters
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Outcome of a check body before it is wrapped into a report.
struct Outcome {
    measured: f64,
    bound: f64,
    passed: bool,
    params: Vec<(&'static str, String)>,
}

fn run_check(name: &str, b: &SymbolSpec, base: Vec<(&'static str, String)>, body: impl FnOnce() -> Result<Outcome>) -> CheckReport {
    let start = Instant::now();
    let result = body();
    let runtime_ms = Some(start.elapsed().as_millis() as u64);
    let mut parameters: BTreeMap<String, String> = base.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    match result {
        Ok(outcome) => {
            parameters.extend(outcome.params.into_iter().map(|(k, v)| (k.to_string(), v)));
            CheckReport {
                check_name: name.to_string(),
                symbol: b.to_string(),
                parameters,
                measured: outcome.measured,
                bound_or_target: outcome.bound,
                passed: outcome.passed,
                runtime_ms,
            }
        }
        Err(err) => {
            parameters.insert("error".into(), format!("[{}] {err}", err.module()));
            CheckReport {
                check_name: name.to_string(),
                symbol: b.to_string(),
                parameters,
                measured: f64::NAN,
                bound_or_target: f64::NAN,
                passed: false,
                runtime_ms,
            }
        }
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Polynomials with degree uniform in `0..=max_degree` and coefficients
/// uniform in the square `[-1, 1] × [-1, 1]`.
pub fn random_polynomials(seed: u64, count: usize, max_degree: usize) -> Vec<PolynomialVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let degree = rng.random_range(0..=max_degree);
            let coeffs = (0..=degree)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            PolynomialVector::new(coeffs)
        })
        .collect()
}

/// Random points with `|w| ≤ radius`, uniform in area.
pub fn random_disk_points(seed: u64, count: usize, radius: f64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rho = radius * rng.random_range(0.0f64..1.0).sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(rho, theta)
        })
        .collect()
}

fn symbol_degree(b: &SymbolSpec, op: &'static str) -> Result<usize> {
    b.polynomial_degree().ok_or(Error::UnsupportedVariant {
        op,
        variant: b.variant_name(),
    })
}

fn require_fit(what: &str, degree: usize, limit: usize) -> Result<()> {
    if degree >= limit {
        return Err(Error::DimensionMismatch {
            module: "verify",
            detail: format!("{what} degree {degree} must be below {limit}"),
        });
    }
    Ok(())
}

fn factor(q: crate::operators::OperatorSection) -> Result<PsdFactorization> {
    psd_sqrt(&q, DEFAULT_RANK_TOL)
}

/// `T_b T_b̄ ≤ T_b̄ T_b` on sections: smallest eigenvalue of
/// `defect_b - defect_bbar`.
pub fn check_operator_inequality(b: &SymbolSpec, n: usize, config: &ToleranceConfig) -> CheckReport {
    run_check("operator_inequality", b, vec![("N", n.to_string())], || {
        let diff = defect_b(b, n)?.difference(&defect_bbar(b, n)?);
        let measured = min_eigenvalue(&diff)?;
        Ok(Outcome {
            measured,
            bound: -config.eig_tol,
            passed: measured >= -config.eig_tol,
            params: vec![],
        })
    })
}

/// Ratios `‖f‖_{A(b̄)} / ‖f‖_{A(b)}` must lie in `[1, sqrt(1 + ‖b‖∞²)]`.
pub fn check_norm_equivalence(
    b: &SymbolSpec,
    samples: &[PolynomialVector],
    n: usize,
    config: &ToleranceConfig,
) -> CheckReport {
    run_check(
        "norm_equivalence",
        b,
        vec![("N", n.to_string()), ("samples", samples.len().to_string())],
        || {
            let d = symbol_degree(b, "check_norm_equivalence")?;
            let fb = factor(defect_b(b, n)?)?;
            let fbb = factor(defect_bbar(b, n)?)?;
            let sup = b.sup_norm_estimate(DEFAULT_SUP_GRID);
            let upper = (1.0 + sup * sup).sqrt();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for f in samples.iter().filter(|f| !f.is_zero()) {
                require_fit("sample", f.len() - 1, n.saturating_sub(d + 8))?;
                let ratio = fbb.range_norm(f)?.norm / fb.range_norm(f)?.norm;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            let tol = config.norm_rel_tol;
            Ok(Outcome {
                measured: hi,
                bound: upper,
                passed: lo >= 1.0 - tol && hi <= upper + tol,
                params: vec![("min_ratio", fmt_f(lo)), ("lower_bound", fmt_f(1.0))],
            })
        },
    )
}

/// `‖f‖²_{A(b̄)} = ‖f‖²_{A²} + ‖bf‖²_{A(b)}`, worst relative gap over samples.
pub fn check_norm_identity(
    b: &SymbolSpec,
    samples: &[PolynomialVector],
    n: usize,
    config: &ToleranceConfig,
) -> CheckReport {
    run_check(
        "norm_identity",
        b,
        vec![("N", n.to_string()), ("samples", samples.len().to_string())],
        || {
            let d = symbol_degree(b, "check_norm_identity")?;
            let bpoly = b.as_polynomial().unwrap_or_default();
            let fb = factor(defect_b(b, n)?)?;
            let fbb = factor(defect_bbar(b, n)?)?;
            let mut worst = 0.0f64;
            for f in samples.iter().filter(|f| !f.is_zero()) {
                let bf = &bpoly * f;
                require_fit("b·f", bf.degree().unwrap_or(0), n.saturating_sub(d + 8))?;
                let lhs = fbb.range_norm(f)?.norm.powi(2);
                let rhs = f.a2_norm().powi(2) + fb.range_norm(&bf)?.norm.powi(2);
                worst = worst.max((lhs - rhs).abs() / lhs);
            }
            Ok(Outcome {
                measured: worst,
                bound: config.norm_rel_tol,
                passed: worst <= config.norm_rel_tol,
                params: vec![],
            })
        },
    )
}

/// `‖S_b g‖_{A(b̄)} = ‖g‖_{A_b²}`, with the left side computed through the
/// defect section and the right side through the weighted Gram.
pub fn check_isometry(
    b: &SymbolSpec,
    samples: &[PolynomialVector],
    n: usize,
    m: usize,
    config: &ToleranceConfig,
) -> CheckReport {
    run_check(
        "isometry",
        b,
        vec![("N", n.to_string()), ("M", m.to_string()), ("samples", samples.len().to_string())],
        || {
            let d = symbol_degree(b, "check_isometry")?;
            let fbb = factor(defect_bbar(b, n)?)?;
            let gram = gram_ab2(b, m)?;
            let mut worst = 0.0f64;
            for g in samples.iter().filter(|g| !g.is_zero()) {
                let deg = g.len() - 1;
                require_fit("g", deg, m)?;
                require_fit("g", deg + d, n.saturating_sub(8))?;
                let lhs = fbb.range_norm(&apply_sb(b, g)?)?.norm;
                let rhs = gram.norm(g)?;
                worst = worst.max((lhs - rhs).abs() / rhs);
            }
            Ok(Outcome {
                measured: worst,
                bound: config.norm_rel_tol,
                passed: worst <= config.norm_rel_tol,
                params: vec![],
            })
        },
    )
}

/// Squared `A_b²` distance from `z^k` to `span{z^{k+1}, …, z^{M-1}}`, which
/// must dominate `δ r^{2k+2}/(k+1)` with `δ = min_{r𝔻} (1 - |b|²)`.
pub fn check_tail_distance(b: &SymbolSpec, k: usize, r: f64, m: usize, config: &ToleranceConfig) -> CheckReport {
    run_check(
        "tail_distance",
        b,
        vec![("k", k.to_string()), ("r", r.to_string()), ("M", m.to_string())],
        || {
            let measured = tail_distance_squared(b, k, m)?;
            let delta = delta_min(b, r, DEFAULT_SUP_GRID)?;
            let bound = delta * r.powi(2 * k as i32 + 2) / (k + 1) as f64;
            Ok(Outcome {
                measured,
                bound,
                passed: measured >= bound - config.exact_tol,
                params: vec![("delta", fmt_f(delta))],
            })
        },
    )
}

/// `‖z^k - P z^k‖²_{A_b²}` for the projection onto `span{z^{k+1}, …, z^{M-1}}`.
pub fn tail_distance_squared(b: &SymbolSpec, k: usize, m: usize) -> Result<f64> {
    require_fit("k + 1", k + 1, m)?;
    let gram = gram_ab2(b, m)?;
    let zk = PolynomialVector::monomial(k, Complex64::new(1.0, 0.0));
    let h = project_onto_mn_perp(&zk, k + 1, &gram)?;
    Ok(gram.norm(&h)?.powi(2))
}

/// For inner `b` the spaces coincide with `H²`: the ratios
/// `ρ_k = ‖z^k‖ / ‖z^k‖_{H²}` must have a spread `max ρ / min ρ` that is
/// stable (< 5% change) when the section size doubles.
pub fn check_blaschke_h2(b: &SymbolSpec, degrees: &[usize], n: usize, _config: &ToleranceConfig) -> CheckReport {
    let route = if matches!(b, SymbolSpec::Blaschke { .. }) {
        "abar_via_preimage"
    } else {
        "ab_via_defect"
    };
    run_check(
        "inner_symbol_h2",
        b,
        vec![("N", n.to_string()), ("route", route.to_string()), ("max_degree", degrees.iter().max().copied().unwrap_or(0).to_string())],
        || {
            if !b.is_inner() {
                return Err(Error::UnsupportedVariant {
                    op: "check_blaschke_h2",
                    variant: b.variant_name(),
                });
            }
            let spread_at = |size: usize| -> Result<(f64, f64, f64)> {
                let rhos = inner_symbol_ratios(b, degrees, size)?;
                let lo = rhos.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((hi / lo, lo, hi))
            };
            let (spread_n, _, _) = spread_at(n)?;
            let (spread_2n, lo, hi) = spread_at(2 * n)?;
            let change = (spread_2n - spread_n).abs() / spread_n;
            Ok(Outcome {
                measured: change,
                bound: 0.05,
                passed: spread_2n.is_finite() && change < 0.05,
                params: vec![
                    ("spread_N", fmt_f(spread_n)),
                    ("spread_2N", fmt_f(spread_2n)),
                    ("min_rho", fmt_f(lo)),
                    ("max_rho", fmt_f(hi)),
                ],
            })
        },
    )
}

/// `ρ_k = ‖z^k‖ / ‖z^k‖_{H²}` for an inner symbol: the `A(b)` norm from the
/// exact defect section for monomial symbols, the `A(b̄)` norm through the
/// `S_b` preimage for Blaschke products.
pub fn inner_symbol_ratios(b: &SymbolSpec, degrees: &[usize], size: usize) -> Result<Vec<f64>> {
    let monomials = degrees.iter().map(|&k| PolynomialVector::monomial(k, Complex64::new(1.0, 0.0)));
    match b {
        SymbolSpec::Blaschke { .. } => {
            let ctx = SbContext::new(b, size, DEFAULT_GRAM_TOL)?;
            monomials.map(|f| Ok(ctx.preimage(&f)?.norm)).collect()
        }
        _ => {
            let fb = factor(defect_b(b, size)?)?;
            monomials.map(|f| Ok(fb.range_norm(&f)?.norm)).collect()
        }
    }
}

/// For `|c| < 1`, `A(c)` is `A²` renormed by `1/sqrt(1 - |c|²)`.
pub fn check_constant_symbol(
    b: &SymbolSpec,
    samples: &[PolynomialVector],
    n: usize,
    config: &ToleranceConfig,
) -> CheckReport {
    run_check("constant_symbol", b, vec![("N", n.to_string())], || {
        let c = match b {
            SymbolSpec::Constant(c) if c.norm() < 1.0 => *c,
            _ => {
                return Err(Error::UnsupportedVariant {
                    op: "check_constant_symbol",
                    variant: b.variant_name(),
                })
            }
        };
        let fb = factor(defect_b(b, n)?)?;
        let scale = (1.0 - c.norm_sqr()).sqrt();
        let mut worst = 0.0f64;
        for f in samples.iter().filter(|f| !f.is_zero()) {
            require_fit("sample", f.len() - 1, n.saturating_sub(8))?;
            let want = f.a2_norm() / scale;
            worst = worst.max((fb.range_norm(f)?.norm - want).abs() / want);
        }
        Ok(Outcome {
            measured: worst,
            bound: config.exact_tol,
            passed: worst <= config.exact_tol,
            params: vec![],
        })
    })
}

/// If `h ⊥ z^k` in `L_b²` for `k ≥ n`, then `S_b h` has degree below `n`.
pub fn check_degree_bound(
    b: &SymbolSpec,
    samples: &[PolynomialVector],
    n_values: &[usize],
    m: usize,
    config: &ToleranceConfig,
) -> CheckReport {
    let ns = n_values.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
    run_check("degree_bound", b, vec![("M", m.to_string()), ("n", ns)], || {
        let gram = gram_ab2(b, m)?;
        let sb = SbMatrix::new(b, m)?;
        let (mut window, mut spill) = (0.0f64, 0.0f64);
        for g in samples {
            for &n in n_values {
                let h = project_onto_mn_perp(g, n, &gram)?;
                let p = sb.apply(&h)?;
                window = window.max((n..m).map(|j| p.coeff(j).norm()).fold(0.0, f64::max));
                spill = spill.max(p.max_abs_from(m));
            }
        }
        let measured = window.max(spill);
        Ok(Outcome {
            measured,
            bound: config.exact_tol,
            passed: measured <= config.exact_tol,
            params: vec![("max_below_M", fmt_f(window)), ("max_from_M", fmt_f(spill))],
        })
    })
}

/// The density construction on `g = 1/(1 - z/2)` truncated at degree 40:
/// errors must not increase with `n` and must fall below `1e-3`.
pub fn check_density_convergence(b: &SymbolSpec, m: usize, _config: &ToleranceConfig) -> CheckReport {
    const N_VALUES: [usize; 5] = [2, 4, 8, 16, 32];
    const TARGET: f64 = 1e-3;
    run_check("density_convergence", b, vec![("M", m.to_string()), ("g", "geom:0.5@40".into())], || {
        let g = PolynomialVector::geometric(Complex64::new(0.5, 0.0), 40);
        let report = density_approximate(b, &g, &N_VALUES, m)?;
        let errors: Vec<f64> = report.steps.iter().map(|s| s.error).collect();
        let strictly = errors.windows(2).all(|w| w[1] < w[0]);
        let monotone = errors.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        let last = *errors.last().unwrap_or(&f64::NAN);
        let listed = errors.iter().map(|e| fmt_f(*e)).collect::<Vec<_>>().join(",");
        Ok(Outcome {
            measured: last,
            bound: TARGET,
            passed: monotone && last <= TARGET,
            params: vec![("strictly_decreasing", strictly.to_string()), ("errors", listed)],
        })
    })
}

/// `(S_b q)(w) = ⟨q, k_w⟩_{L_b²}` at seeded points `|w| ≤ 0.9`.
pub fn check_kernel_identity(
    b: &SymbolSpec,
    samples: &[PolynomialVector],
    points: &[Complex64],
    m: usize,
    config: &ToleranceConfig,
) -> CheckReport {
    run_check(
        "kernel_identity",
        b,
        vec![("M", m.to_string()), ("points", points.len().to_string())],
        || {
            let mut worst = 0.0f64;
            for q in samples {
                let scale = q.h2_norm().max(1.0);
                for &w in points {
                    let gap = pointwise_identity_check(b, q, KernelPoint::new(w)?, m)?;
                    worst = worst.max(gap / scale);
                }
            }
            Ok(Outcome {
                measured: worst,
                bound: config.exact_tol,
                passed: worst <= config.exact_tol,
                params: vec![],
            })
        },
    )
}

/// `S_b S_b* = I - T_b̄ T_b`: the square `S_b` matrix in the orthonormal basis
/// against `I - T*T` built from an enlarged Toeplitz section.
pub fn check_sb_adjoint_product(b: &SymbolSpec, n: usize, config: &ToleranceConfig) -> CheckReport {
    run_check("sb_adjoint_product", b, vec![("N", n.to_string())], || {
        let d = symbol_degree(b, "check_sb_adjoint_product")?;
        let sb = SbMatrix::with_rows(b, n, n)?;
        let via_sb = CMatrix::from_fn(n, n, |j, i| {
            sb.matrix()[(j, i)] * (((i + 1) as f64) / ((j + 1) as f64)).sqrt()
        });
        let t = toeplitz_analytic(b, n + d)?;
        let product = t.matrix().adjoint() * t.matrix();
        let via_toeplitz = CMatrix::identity(n, n) - product.view((0, 0), (n, n));
        let measured = max_abs_entry(&(via_sb - via_toeplitz));
        Ok(Outcome {
            measured,
            bound: config.exact_tol,
            passed: measured <= config.exact_tol,
            params: vec![],
        })
    })
}

/// Gram size for the degree-bound check. Orthogonality is imposed only below
/// the ambient cutoff, and the coefficients of `S_b h` beyond it decay
/// geometrically in `M`; 160 keeps them under `1e-10` for the test corpus.
pub const DEGREE_BOUND_GRAM: usize = 160;

/// Runs every applicable check for each symbol.
pub fn run_all(config: &ToleranceConfig, symbols: &[SymbolSpec]) -> Vec<CheckReport> {
    let samples = random_polynomials(config.seed, config.samples, config.max_sample_degree);
    let points = random_disk_points(config.seed.wrapping_add(1), 20, KERNEL_POINT_RADIUS);
    let n = config.section_size;
    let m = config.gram_size;
    let mut with_one = vec![PolynomialVector::from_real(&[1.0])];
    with_one.extend(samples.iter().cloned());

    type Job<'a> = Box<dyn Fn() -> CheckReport + Send + Sync + 'a>;
    let mut jobs: Vec<Job> = Vec::new();
    for b in symbols {
        let polynomial = b.polynomial_degree().is_some();
        if polynomial {
            jobs.push(Box::new(move || check_operator_inequality(b, n, config)));
            let s = with_one.clone();
            jobs.push(Box::new(move || check_norm_equivalence(b, &s, n, config)));
            let s = samples.clone();
            jobs.push(Box::new(move || check_norm_identity(b, &s, n, config)));
            let s = samples.clone();
            jobs.push(Box::new(move || check_isometry(b, &s, n, m, config)));
            jobs.push(Box::new(move || check_sb_adjoint_product(b, n, config)));
        }
        for &k in &config.distance_ks {
            for &r in &config.distance_radii {
                jobs.push(Box::new(move || check_tail_distance(b, k, r, m, config)));
            }
        }
        let s = samples.clone();
        let deg_m = m.max(DEGREE_BOUND_GRAM);
        jobs.push(Box::new(move || check_degree_bound(b, &s, &[2, 5, 9], deg_m, config)));
        jobs.push(Box::new(move || check_density_convergence(b, m.max(72), config)));
        let s: Vec<PolynomialVector> = samples.iter().take(3).cloned().collect();
        let p = points.clone();
        let kernel_m = m.min(32).max(config.max_sample_degree + 1);
        jobs.push(Box::new(move || check_kernel_identity(b, &s, &p, kernel_m, config)));
        if b.is_inner() {
            let degrees: Vec<usize> = (0..=12).collect();
            jobs.push(Box::new(move || check_blaschke_h2(b, &degrees, n, config)));
        }
        if matches!(b, SymbolSpec::Constant(c) if c.norm() < 1.0) {
            let s = samples.clone();
            jobs.push(Box::new(move || check_constant_symbol(b, &s, n, config)));
        }
    }
    jobs.par_iter().map(|job| job()).collect()
}
