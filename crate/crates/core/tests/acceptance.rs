//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use common::{c, Mat};
use num_complex::Complex64 as C;
use subbergman::moments::{
    moment_block_exact, moment_block_quadrature, weighted_moments, QuadratureRule, WeightTag,
};
use subbergman::operators::{defect_b, defect_bbar, psd_sqrt, DEFAULT_RANK_TOL};
use subbergman::spaces::{density_approximate, gram_ab2, project_onto_mn_perp};
use subbergman::symbols::parse_symbol;
use subbergman::verify::{
    check_constant_symbol, check_degree_bound, check_isometry, check_norm_equivalence, check_norm_identity,
    check_operator_inequality, check_tail_distance, random_polynomials, tail_distance_squared, ToleranceConfig,
};
use subbergman::{PolynomialVector, SymbolSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn sym(text: &str) -> SymbolSpec {
    parse_symbol(text).unwrap()
}

fn coeffs(b: &SymbolSpec) -> Vec<C> {
    b.as_polynomial().map(|p| p.coeffs().to_vec()).unwrap_or_default()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn max_diff(a: &Mat, b: &Mat) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

const CORPUS: [&str; 3] = ["poly:0,1", "poly:0.5,0.5", "const:0.6"];

fn exact_diagonal() -> Outcome {
    let z = SymbolSpec::identity();
    let db = defect_b(&z, 32).unwrap();
    let dbb = defect_bbar(&z, 32).unwrap();
    let want_b = Mat::from_fn(32, 32, |j, k| if j == k { c(1.0 / (k + 1) as f64, 0.0) } else { c(0.0, 0.0) });
    let want_bb = Mat::from_fn(32, 32, |j, k| if j == k { c(1.0 / (k + 2) as f64, 0.0) } else { c(0.0, 0.0) });
    let e1 = max_diff(db.matrix(), &want_b);
    let e2 = max_diff(dbb.matrix(), &want_bb);
    ensure(e1 <= 1e-12 && e2 <= 1e-12, format!("matrix errors {e1:.2e}, {e2:.2e}"))?;
    let fb = psd_sqrt(&db, DEFAULT_RANK_TOL).unwrap();
    let fbb = psd_sqrt(&dbb, DEFAULT_RANK_TOL).unwrap();
    let mut worst = 0.0f64;
    for k in 0..=24 {
        let zk = PolynomialVector::monomial(k, c(1.0, 0.0));
        let nb = fb.range_norm(&zk).unwrap().norm;
        let nbb = fbb.range_norm(&zk).unwrap().norm;
        worst = worst.max((nb - 1.0).abs());
        worst = worst.max((nbb - (((k + 2) as f64) / ((k + 1) as f64)).sqrt()).abs());
    }
    ensure(worst <= 1e-10, format!("norm error {worst:.2e}"))?;
    Ok(format!("matrix errors {e1:.1e}/{e2:.1e}, norm error {worst:.1e}"))
}

fn isometry() -> Outcome {
    let cfg = ToleranceConfig::default();
    let samples = random_polynomials(cfg.seed, 20, 12);
    let mut worst_lib = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for text in CORPUS {
        let b = sym(text);
        let bc = coeffs(&b);
        let d = b.polynomial_degree().unwrap();
        for g in &samples {
            let deg = g.degree().unwrap_or(0);
            let n = deg + d + 24;
            let report = check_isometry(&b, std::slice::from_ref(g), n, deg + 1, &cfg);
            ensure(report.passed, format!("{text}: {report:?}"))?;
            worst_lib = worst_lib.max(report.measured);

            let f = common::apply_sb(&bc, g.coeffs(), deg + d + 1);
            let lhs = common::range_norm(&common::defect_bbar(&bc, n), &f);
            let rhs = common::gram_norm(&common::gram(&bc, deg + 1), g.coeffs());
            worst_oracle = worst_oracle.max((lhs - rhs).abs() / rhs);
        }
    }
    ensure(worst_oracle <= 1e-6, format!("oracle gap {worst_oracle:.2e}"))?;
    Ok(format!("max gap {worst_lib:.1e} (oracle {worst_oracle:.1e})"))
}

fn degree_bound() -> Outcome {
    let cfg = ToleranceConfig::default();
    let samples = random_polynomials(cfg.seed, 20, 12);
    let m = 160;
    let mut worst = 0.0f64;
    for text in CORPUS {
        let b = sym(text);
        let report = check_degree_bound(&b, &samples, &[2, 5, 9], m, &cfg);
        ensure(report.passed, format!("{text}: {report:?}"))?;
        let bc = coeffs(&b);
        let gram = gram_ab2(&b, m).unwrap();
        for g in samples.iter().take(5) {
            for n in [2, 5, 9] {
                let h = project_onto_mn_perp(g, n, &gram).unwrap();
                let p = common::apply_sb(&bc, h.coeffs(), m + bc.len());
                let tail = p[n..].iter().map(|v| v.norm()).fold(0.0, f64::max);
                worst = worst.max(tail);
            }
        }
    }
    ensure(worst <= 1e-10, format!("oracle tail {worst:.2e}"))?;
    Ok(format!("M = 160, largest coefficient past n {worst:.1e}"))
}

fn density() -> Outcome {
    let z = SymbolSpec::identity();
    let g = PolynomialVector::geometric(c(0.5, 0.0), 40);
    let ns = [2, 4, 8, 16, 32];
    let report = density_approximate(&z, &g, &ns, 72).unwrap();
    let errors: Vec<f64> = report.steps.iter().map(|s| s.error).collect();
    ensure(errors.windows(2).all(|w| w[1] < w[0]), format!("not strictly decreasing: {errors:?}"))?;
    ensure(errors[4] <= 1e-3, format!("error(32) = {:.2e}", errors[4]))?;

    // min over p in span{z^n..z^71} of ||g - p||_G; the error is ||p*||_G.
    let gram = common::gram(&[c(0.0, 0.0), c(1.0, 0.0)], 72);
    let root = gram.clone().cholesky().unwrap().l().adjoint();
    let gv = Mat::from_fn(72, 1, |k, _| g.coeff(k));
    let mut worst = 0.0f64;
    for (step, &n) in report.steps.iter().zip(&ns) {
        let basis = root.columns(n, 72 - n).into_owned();
        let target = &root * &gv;
        let coef = basis.clone().svd(true, true).solve(&target, 1e-14).unwrap();
        let err = (&basis * coef).norm();
        worst = worst.max((err - step.error).abs());
    }
    ensure(worst <= 1e-9, format!("least-squares mismatch {worst:.2e}"))?;
    Ok(format!("error(32) = {:.2e}, least-squares mismatch {worst:.1e}", errors[4]))
}

fn norm_equivalence() -> Outcome {
    let cfg = ToleranceConfig::default();
    let z = SymbolSpec::identity();
    let one = [PolynomialVector::from_real(&[1.0])];
    let r = check_norm_equivalence(&z, &one, 32, &cfg);
    ensure((r.measured - 2f64.sqrt()).abs() <= 1e-12, format!("ratio at f = 1: {}", r.measured))?;

    let samples = random_polynomials(cfg.seed.wrapping_add(50), 50, 12);
    let fb = psd_sqrt(&defect_b(&z, 64).unwrap(), DEFAULT_RANK_TOL).unwrap();
    let fbb = psd_sqrt(&defect_bbar(&z, 64).unwrap(), DEFAULT_RANK_TOL).unwrap();
    let (mut lo, mut hi, mut oracle_err) = (f64::INFINITY, 0.0f64, 0.0f64);
    for f in samples.iter().filter(|f| !f.is_zero()) {
        let nb = fb.range_norm(f).unwrap().norm;
        let nbb = fbb.range_norm(f).unwrap().norm;
        let want_b: f64 = f.coeffs().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let want_bb: f64 = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, v)| v.norm_sqr() * (k + 2) as f64 / (k + 1) as f64)
            .sum::<f64>()
            .sqrt();
        oracle_err = oracle_err.max((nb - want_b).abs() / want_b).max((nbb - want_bb).abs() / want_bb);
        lo = lo.min(nbb / nb);
        hi = hi.max(nbb / nb);
    }
    ensure(lo >= 1.0 - 1e-12 && hi <= 2f64.sqrt() + 1e-12, format!("b = z ratios [{lo}, {hi}]"))?;
    ensure(oracle_err <= 1e-10, format!("closed-form mismatch {oracle_err:.2e}"))?;

    let b = sym("poly:0.5,0.5");
    let r = check_norm_equivalence(&b, &samples, 64, &cfg);
    ensure(r.passed, format!("{r:?}"))?;
    ensure(r.bound_or_target <= 2f64.sqrt() + 1e-12, "upper constant exceeds sqrt 2")?;
    let bc = coeffs(&b);
    let (qb, qbb) = (common::defect_b(&bc, 64), common::defect_bbar(&bc, 64));
    for f in samples.iter().filter(|f| !f.is_zero()) {
        let ratio = common::range_norm(&qbb, f.coeffs()) / common::range_norm(&qb, f.coeffs());
        ensure(
            (1.0 - 1e-6..=2f64.sqrt() + 1e-6).contains(&ratio),
            format!("oracle ratio {ratio} out of range"),
        )?;
    }
    Ok(format!("b = z ratios in [{lo:.6}, {hi:.6}]; b = 0.5+0.5z max {:.6}", r.measured))
}

fn identity_check() -> Outcome {
    let cfg = ToleranceConfig::default();
    let samples = random_polynomials(cfg.seed, 20, 12);
    let mut worst = 0.0f64;
    for text in ["poly:0,1", "poly:0.5,0.5", "const:0.6", "const:0.6i", "const:0", "poly:0.3,-0.2i,0.4"] {
        let b = sym(text);
        let r = check_norm_identity(&b, &samples, 64, &cfg);
        ensure(r.passed, format!("{text}: {r:?}"))?;
        worst = worst.max(r.measured);
        let bc = coeffs(&b);
        let (qb, qbb) = (common::defect_b(&bc, 64), common::defect_bbar(&bc, 64));
        let bpoly = b.as_polynomial().unwrap();
        for f in samples.iter().filter(|f| !f.is_zero()).take(5) {
            let bf = &bpoly * f;
            let lhs = common::range_norm(&qbb, f.coeffs()).powi(2);
            let rhs = common::a2_norm_sq(f.coeffs()) + common::range_norm(&qb, bf.coeffs()).powi(2);
            let gap = (lhs - rhs).abs() / lhs;
            ensure(gap <= 1e-6, format!("{text}: oracle gap {gap:.2e}"))?;
        }
    }
    Ok(format!("max relative gap {worst:.1e}"))
}

fn operator_inequality() -> Outcome {
    let cfg = ToleranceConfig::default();
    let mut lowest = f64::INFINITY;
    for text in ["poly:0,1", "poly:0.5,0.5", "const:0.6", "const:0.6i", "const:0", "poly:0.3,-0.2i,0.4"] {
        let b = sym(text);
        let r = check_operator_inequality(&b, 48, &cfg);
        ensure(r.passed, format!("{text}: {r:?}"))?;
        let bc = coeffs(&b);
        let oracle = common::min_eig(&(common::defect_b(&bc, 48) - common::defect_bbar(&bc, 48)));
        ensure((oracle - r.measured).abs() <= 1e-10, format!("{text}: oracle {oracle} vs {}", r.measured))?;
        lowest = lowest.min(r.measured);
    }
    Ok(format!("smallest eigenvalue {lowest:.2e}"))
}

fn tail_distance() -> Outcome {
    let cfg = ToleranceConfig::default();
    let mut slack = f64::INFINITY;
    for text in ["poly:0,1", "poly:0.5,0.5", "blaschke:0.5"] {
        let b = sym(text);
        for k in [0usize, 1, 3] {
            for r in [0.3, 0.5, 0.8] {
                let rep = check_tail_distance(&b, k, r, 64, &cfg);
                ensure(rep.passed, format!("{text} k={k} r={r}: {rep:?}"))?;
                slack = slack.min(rep.measured - rep.bound_or_target);
            }
            if let Some(p) = b.as_polynomial() {
                let oracle = common::schur_distance(&common::gram(p.coeffs(), 64), k);
                let lib = tail_distance_squared(&b, k, 64).unwrap();
                ensure((oracle - lib).abs() <= 1e-10, format!("{text} k={k}: Schur oracle {oracle} vs {lib}"))?;
            }
        }
    }

    // Blaschke(0.5): Gram and δ from brute-force integration on a fine grid.
    let a = c(0.5, 0.0);
    let weight = |z: C| 1.0 - common::blaschke_factor(a, c(1.0, 0.0), z).norm_sqr();
    let m = 12;
    let brute = common::brute_gram(weight, m, 2000, 256);
    let b = sym("blaschke:0.5");
    for k in [0usize, 1, 3] {
        let oracle = common::schur_distance(&brute, k);
        let lib = tail_distance_squared(&b, k, m).unwrap();
        ensure((oracle - lib).abs() <= 1e-8, format!("Blaschke k={k}: grid oracle {oracle} vs {lib}"))?;
    }
    for r in [0.3, 0.5, 0.8] {
        let grid_min = (0..100_000)
            .map(|l| weight(C::from_polar(r, std::f64::consts::TAU * l as f64 / 100_000.0)))
            .fold(f64::INFINITY, f64::min);
        let lib = subbergman::moments::delta_min(&b, r, 4096).unwrap();
        ensure((grid_min - lib).abs() <= 1e-9, format!("delta at r={r}: grid {grid_min} vs {lib}"))?;
    }
    Ok(format!("smallest margin over the bound {slack:.3e}"))
}

fn constant_symbol() -> Outcome {
    let cfg = ToleranceConfig::default();
    let samples = random_polynomials(cfg.seed, 20, 12);
    let mut worst = 0.0f64;
    for (text, cc) in [("const:0", c(0.0, 0.0)), ("const:0.6", c(0.6, 0.0)), ("const:0.6i", c(0.0, 0.6))] {
        let b = sym(text);
        let r = check_constant_symbol(&b, &samples, 32, &cfg);
        ensure(r.passed, format!("{text}: {r:?}"))?;
        worst = worst.max(r.measured);
        let fb = psd_sqrt(&defect_b(&b, 32).unwrap(), DEFAULT_RANK_TOL).unwrap();
        for f in samples.iter().filter(|f| !f.is_zero()) {
            let want = (common::a2_norm_sq(f.coeffs()) / (1.0 - cc.norm_sqr())).sqrt();
            let got = fb.range_norm(f).unwrap().norm;
            ensure((got - want).abs() / want <= 1e-10, format!("{text}: {got} vs {want}"))?;
        }
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn quadrature_fidelity() -> Outcome {
    let start = Instant::now();
    let n = 32;
    let rule = QuadratureRule::default_for(n);
    let mut worst = 0.0f64;
    let mut worst_formula = 0.0f64;
    let raw = random_polynomials(0x51, 8, 4);
    let mut symbols = vec![sym("const:0.6i"), sym("poly:0,1"), sym("poly:0.5,0.5"), sym("poly:0.2,0,0,0,0.7i")];
    for p in raw {
        let total: f64 = p.coeffs().iter().map(|v| v.norm()).sum();
        if total > 0.0 {
            symbols.push(SymbolSpec::polynomial(p.scale(c(0.9 / total, 0.0))).unwrap());
        }
    }
    for b in &symbols {
        for tag in [WeightTag::Plain, WeightTag::ModBSquared, WeightTag::OneMinusModBSquared] {
            let exact = moment_block_exact(b, n, n, tag).unwrap();
            let quad = moment_block_quadrature(b, n, n, tag, &rule).unwrap();
            worst = worst.max(max_diff(&exact, &quad));
        }
        let formula = common::gram(&coeffs(b), n);
        worst_formula = worst_formula.max(max_diff(&formula, &moment_block_exact(b, n, n, WeightTag::OneMinusModBSquared).unwrap()));
    }
    ensure(worst <= 1e-10, format!("quadrature vs exact {worst:.2e}"))?;
    ensure(worst_formula <= 1e-14, format!("exact vs term-by-term formula {worst_formula:.2e}"))?;

    let a = c(0.5, 0.0);
    let brute = common::brute_disk(|z| c(1.0 - common::blaschke_factor(a, c(1.0, 0.0), z).norm_sqr(), 0.0), 4000, 512);
    let lib = weighted_moments(&sym("blaschke:0.5"), 1, WeightTag::OneMinusModBSquared).unwrap().get(0, 0);
    ensure((brute - lib).norm() <= 1e-8, format!("Blaschke W00 {lib} vs grid {brute}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs <= 30.0, format!("took {secs:.1} s"))?;
    Ok(format!("{} symbols, max error {worst:.1e}, {secs:.2} s", symbols.len()))
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_subbergman");
    let args = [
        "verify", "--symbol", "poly:0,1", "--symbol", "poly:0.5,0.5", "--symbol", "const:0.6", "--symbol",
        "blaschke:0.5", "--N", "48", "--M", "48", "--seed", "2839",
    ];
    let run = |extra: &[&str]| {
        let out = Command::new(exe).args(args).args(extra).env_remove("SUBBERGMAN_THREADS").output().unwrap();
        (out.status.code(), out.stdout)
    };
    let (code1, first) = run(&[]);
    let (code2, second) = run(&[]);
    let (code3, single) = run(&["--threads", "1"]);
    ensure(code1 == Some(0) && code2 == Some(0) && code3 == Some(0), format!("exit codes {code1:?} {code2:?} {code3:?}"))?;
    ensure(!first.is_empty(), "empty output")?;
    ensure(first == second, "two runs differ")?;
    ensure(first == single, "single-threaded run differs")?;
    let rows = first.iter().filter(|&&b| b == b'\n').count() - 1;
    Ok(format!("{rows} rows, {} bytes, identical across runs and thread counts", first.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exact diagonal oracle for b = z", exact_diagonal),
        ("isometry of S_b", isometry),
        ("degree bound after projection", degree_bound),
        ("density convergence", density),
        ("norm equivalence", norm_equivalence),
        ("norm identity", identity_check),
        ("operator inequality", operator_inequality),
        ("tail distance bound", tail_distance),
        ("constant symbol renorming", constant_symbol),
        ("quadrature fidelity", quadrature_fidelity),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, body)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
