//! Acceptance checks. Runs as a plain binary and prints one PASS/FAIL line
//! per criterion; exits non-zero when any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use viscoplate::diagnostics::{fit_decay, log_sobolev_gap, log_sobolev_worst_a, memory_cs_check, s_log_constant};
use viscoplate::dynamics::{memory_term, simulate, HistoryBuffer, KernelTable, NewtonOptions, PhysicalParams};
use viscoplate::kernels::envelope::{k1_fn, k1_inverse, w2_fn, w2_inverse};
use viscoplate::kernels::{convex_conjugate, envelope_linear_b, parse_damping, parse_kernel, ConvexModulus, XiWeight};
use viscoplate::scenario::{preset, run_scenario, RunOptions, RunOutcome, Verdict, PRESET_NAMES};
use viscoplate::spectral::{assemble_grams, beam_roots, build_basis, default_quad_order, estimate_cp};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_preset(name: &str, refine: usize) -> RunOutcome {
    let s = preset(name).unwrap();
    run_scenario(
        &s,
        &RunOptions {
            refine,
            ..Default::default()
        },
    )
}

fn dissipation_identity() -> Outcome {
    let start = Instant::now();
    let out = run_preset("exp-linear", 3);
    let secs = start.elapsed().as_secs_f64();
    let r = out.report.refinement.as_ref().ok_or("no refinement report")?;
    let detail = format!(
        "slope {:.4} over dt = {:?}, residuals {:?}, {secs:.1} s",
        r.slope,
        r.dts,
        r.max_residuals.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()
    );
    let decreasing = r.max_residuals.windows(2).all(|w| w[1] < w[0]);
    ensure((r.slope - 2.0).abs() <= 0.1 && decreasing && secs < 60.0, detail)
}

fn monotonicity(runs: &BTreeMap<&str, RunOutcome>) -> Outcome {
    let mut checked = Vec::new();
    let mut bad = Vec::new();
    for (name, out) in runs {
        let passes_hypotheses = [
            &out.report.hypotheses.h1,
            &out.report.hypotheses.h2,
            &out.report.hypotheses.h3,
            &out.report.hypotheses.h4,
        ]
        .iter()
        .all(|c| c.verdict != Verdict::Fail);
        if !passes_hypotheses {
            continue;
        }
        let worst = out
            .samples
            .windows(2)
            .map(|w| w[1].e - w[0].e)
            .fold(f64::NEG_INFINITY, f64::max);
        checked.push(*name);
        if worst.is_nan() || worst > 1e-10 || out.samples.len() < 2 {
            bad.push(format!("{name} rises by {worst:e}"));
        }
    }
    ensure(
        bad.is_empty() && checked.len() >= 6,
        format!(
            "{} presets checked; {}",
            checked.len(),
            if bad.is_empty() {
                "no rises".into()
            } else {
                bad.join(", ")
            }
        ),
    )
}

fn conservation(runs: &BTreeMap<&str, RunOutcome>) -> Outcome {
    let out = &runs["conservative"];
    let s = preset("conservative").unwrap();
    let e0 = out.samples[0].e;
    let drift = out.samples.iter().map(|x| (x.e - e0).abs()).fold(0.0, f64::max);
    let periods = s.time.t_end / (2.0 * std::f64::consts::PI);
    ensure(
        drift <= 1e-6 * e0 && s.time.dt == 1e-3 && periods >= 10.0 - 1e-12,
        format!("drift {drift:.3e} against E(0) = {e0:.6} over {periods:.1} periods"),
    )
}

fn potential_well(runs: &BTreeMap<&str, RunOutcome>) -> Outcome {
    let out = &runs["well"];
    let w = out.report.well.as_ref().ok_or("no well report")?;
    let s = preset("well").unwrap();
    ensure(
        w.certified && w.violations == 0 && s.time.t_end == 10.0 && out.report.completed,
        format!(
            "certified {}, {} violations over {} samples, min I = {:.3e}, E(0) = {:.4e}",
            w.certified, w.violations, w.samples, w.min_i, w.e0
        ),
    )
}

fn log_sobolev(runs: &BTreeMap<&str, RunOutcome>) -> Outcome {
    let mut worst_run = f64::INFINITY;
    for out in runs.values() {
        if out.report.verdicts.log_sobolev.verdict == Verdict::Fail {
            return Err(format!(
                "{}: {}",
                out.report.scenario, out.report.verdicts.log_sobolev.detail
            ));
        }
        worst_run = worst_run.min(out.report.functionals.min_sobolev_gap);
    }
    let basis = build_basis(2, 4, 1.0, default_quad_order(4)).unwrap();
    let grams = assemble_grams(&basis).unwrap();
    let cp = estimate_cp(&grams);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_random = f64::INFINITY;
    for _ in 0..100 {
        let g = DVector::from_fn(basis.dim(), |_, _| rng.random_range(-1.0..1.0));
        let norm = (g.dot(&(&grams.m0 * &g))).sqrt();
        let target = 10f64.powf(rng.random_range(-3.0..3.0));
        let g = g * (target / norm);
        let (_, gap) = log_sobolev_worst_a(&g, cp, &basis, &grams);
        let a = 10f64.powf(rng.random_range(-2.0..2.0));
        let at_a = log_sobolev_gap(&g, a, cp, &basis, &grams).unwrap();
        worst_random = worst_random.min(gap.min(at_a) / target.powi(2));
    }
    ensure(
        worst_run >= -1e-8 && worst_random >= -1e-8,
        format!("min gap along runs {worst_run:.3e}; min relative gap over 100 random plates {worst_random:.3e}"),
    )
}

fn d_oracle(eps0: f64) -> f64 {
    // sup over s in (0, 1) of (s|ln s| - s²) / s^{1-ε₀}; beyond 1 the ratio is negative
    let n = 1_000_000;
    (1..n)
        .map(|i| {
            let x = -60.0 * (1.0 - i as f64 / n as f64);
            let s = x.exp();
            (s * x.abs() - s * s) / s.powf(1.0 - eps0)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn s_log_sweep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut notes = Vec::new();
    for eps0 in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let d = s_log_constant(eps0).map_err(|e| e.to_string())?;
        let oracle = d_oracle(eps0);
        if (d - oracle).abs() > 1e-6 * oracle {
            return Err(format!("ε₀ = {eps0}: d = {d} but grid oracle gives {oracle}"));
        }
        for _ in 0..100_000 {
            let s: f64 = 10f64.powf(rng.random_range(-8.0..3.0));
            let lhs = s * s.ln().abs();
            let rhs = s * s + d * s.powf(1.0 - eps0);
            if lhs > rhs * (1.0 + 1e-12) {
                return Err(format!("ε₀ = {eps0}: fails at s = {s:e}"));
            }
        }
        notes.push(format!("d({eps0}) = {d:.4}"));
    }
    let half = s_log_constant(0.5).unwrap();
    ensure(
        (half - 0.696).abs() <= 1e-2,
        format!("{}; d(1/2) = {half:.6}", notes.join(", ")),
    )
}

fn memory_oracle() -> Outcome {
    let basis = build_basis(1, 6, 1.0, default_quad_order(6)).unwrap();
    let grams = assemble_grams(&basis).unwrap();
    let kernel = parse_kernel("exp(0.5,1)").unwrap();
    let params = PhysicalParams::new(1.0, 0.5, 1e-8, kernel.clone(), parse_damping("damp-linear(1)").unwrap()).unwrap();
    let mut g0 = DVector::zeros(6);
    g0[0] = 0.1;
    g0[1] = -0.05;
    let (dt, steps) = (1e-3, 1000);
    let mut worst_gap = f64::INFINITY;
    let traj = simulate(
        &basis,
        &grams,
        &params,
        g0,
        DVector::zeros(6),
        dt,
        steps,
        100,
        NewtonOptions::default(),
        |it| {
            worst_gap = worst_gap.min(memory_cs_check(it.history(), it.table(), &it.params().kernel).min_gap());
            Ok(())
        },
    )
    .map_err(|e| e.to_string())?;
    let snaps = traj.history.snapshots();
    let table = KernelTable::new(&kernel, dt, steps + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_err: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(2..=steps);
        let mut h = HistoryBuffer::new(dt, &grams.m2_factor());
        for g in &snaps[..=n] {
            h.push(g.clone());
        }
        let fast = memory_term(&h, &table, &grams.m2);
        let mut brute = DVector::<f64>::zeros(6);
        let mut scale: f64 = 0.0;
        for i in 0..=n {
            for j in 0..6 {
                for k in 0..6 {
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    let term = w * dt * kernel.value((n - i) as f64 * dt) * grams.m2[(j, k)] * snaps[i][k];
                    brute[j] += term;
                    scale = scale.max(term.abs());
                }
            }
        }
        let norm = brute.amax().max(scale);
        worst_err = worst_err.max((fast - brute).amax() / norm);
    }
    ensure(
        worst_err <= 1e-13 && worst_gap >= -1e-10,
        format!("largest relative re-summation error {worst_err:.2e}; smallest Cauchy-Schwarz gap {worst_gap:.2e}"),
    )
}

fn decay_envelopes(runs: &BTreeMap<&str, RunOutcome>) -> Outcome {
    let mut notes = Vec::new();
    for name in ["exp-linear", "power-linear"] {
        let out = &runs[name];
        let f = out.report.decay_fit.as_ref().ok_or(format!("{name}: no fit"))?;
        let t_end = preset(name).unwrap().time.t_end;
        if f.overshoot != 0.0 || f.window != (t_end / 2.0, t_end) || f.samples < 50 {
            return Err(format!("{name}: overshoot {:e} on {:?}", f.overshoot, f.window));
        }
        notes.push(format!("{name} {:?} c = {:.4e}", f.case, f.c_max));
    }
    let kernel = parse_kernel(&preset("power-linear").unwrap().physics.kernel).unwrap();
    if kernel.value(1.0) != 0.4 * 0.25 {
        return Err("power preset is not b₀(1+t)^-2".into());
    }
    let times: Vec<f64> = (0..=500).map(|i| i as f64 * 0.01).collect();
    let e: Vec<f64> = times.iter().map(|t| 5.0 * (-2.0 * t).exp()).collect();
    let env = envelope_linear_b(&XiWeight::constant(0.002).unwrap(), 1e-3, 1.0, 0.0).unwrap();
    let fit = fit_decay(&times, &e, &env, (0.0, 5.0)).unwrap().unwrap();
    let k = fit.exponent.unwrap();
    notes.push(format!("synthetic exponent {k:.5}"));
    ensure((k - 2.0).abs() <= 0.02, notes.join("; "))
}

fn convexity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_young = f64::INFINITY;
    let mut worst_trip: f64 = 0.0;
    for _ in 0..10_000 {
        let p = rng.random_range(1.2..3.5);
        let b = ConvexModulus::power(1.0, p, 1.0).unwrap();
        let s = rng.random_range(1e-6..1.0);
        let tau = rng.random_range(1e-6..p * 0.999);
        let young = b.value(s) + convex_conjugate(&b, tau).unwrap() - s * tau;
        worst_young = worst_young.min(young);
        let back = b.derivative_inverse(b.derivative(s)).unwrap();
        worst_trip = worst_trip.max((back - s).abs());
    }
    let mut worst_k1: f64 = 0.0;
    let mut worst_w2: f64 = 0.0;
    for p in [1.5f64, 2.0, 3.0] {
        let b = ConvexModulus::power(1.0, p, 1e6).unwrap();
        for (eps, eps1) in [(0.5f64, 1.0f64), (1.0, 0.5), (0.2, 2.0)] {
            let q = p * (1.0 + eps);
            for y in [1e-4, 1e-2, 0.3, 1.0, 5.0] {
                // K₁(x) = q ε₁^{q-1} x^q
                let x = (y / (q * eps1.powf(q - 1.0))).powf(1.0 / q);
                worst_k1 = worst_k1.max((k1_inverse(&b, eps, eps1, y).unwrap() - x).abs() / x.max(1.0));
                worst_k1 = worst_k1.max((k1_fn(&b, eps, eps1, x) - y).abs() / y.max(1.0));
                // with H = B: W(x) = (x/2)^q, W₂(x) = x (q/2)(ε₁x/2)^{q-1}
                let x = (y / ((q / 2.0) * (eps1 / 2.0).powf(q - 1.0))).powf(1.0 / q);
                worst_w2 = worst_w2.max((w2_inverse(&b, &b, eps, eps1, y).unwrap() - x).abs() / x.max(1.0));
                worst_w2 = worst_w2.max((w2_fn(&b, &b, eps, eps1, x).unwrap() - y).abs() / y.max(1.0));
            }
        }
    }
    ensure(
        worst_young >= -1e-12 && worst_trip <= 1e-10 && worst_k1 <= 1e-10 && worst_w2 <= 1e-10,
        format!(
            "Young min {worst_young:.2e}, (B')⁻¹ round trip {worst_trip:.2e}, K₁ {worst_k1:.2e}, W₂ {worst_w2:.2e}"
        ),
    )
}

fn root_oracle(j: usize) -> f64 {
    let f = |b: f64| b.cos() * b.cosh() - 1.0;
    let (mut lo, mut hi) = (
        (j as f64 + 0.5) * std::f64::consts::PI - 1.0,
        (j as f64 + 0.5) * std::f64::consts::PI + 1.0,
    );
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn spectral_layer() -> Outcome {
    let roots = beam_roots(8);
    let root_err = roots
        .iter()
        .enumerate()
        .map(|(i, b)| (b - root_oracle(i + 1)).abs())
        .fold(0.0, f64::max);
    // the quoted digits are good to one unit in the seventh decimal
    let quoted = (roots[0] - 4.7300408).abs() < 1e-7 && (roots[1] - 7.8532046).abs() < 1e-7;
    let mut m2_err: f64 = 0.0;
    for length in [1.0, 2.0] {
        let basis = build_basis(1, 8, length, default_quad_order(8)).unwrap();
        let g = assemble_grams(&basis).unwrap();
        for i in 0..8 {
            let d = (roots[i] / length).powi(4);
            for j in 0..8 {
                let want = if i == j { d } else { 0.0 };
                m2_err = m2_err.max((g.m2[(i, j)] - want).abs() / d);
            }
        }
    }
    let cp = |m| {
        let basis = build_basis(1, m, 1.0, default_quad_order(m)).unwrap();
        estimate_cp(&assemble_grams(&basis).unwrap())
    };
    let (c16, c32) = (cp(16), cp(32));
    let change = (c32 - c16).abs() / c32;
    ensure(
        root_err <= 1e-10 && quoted && m2_err <= 1e-8 && change < 1e-3,
        format!(
            "roots within {root_err:.1e} (β₁ = {:.7}, β₂ = {:.7}), M2 within {m2_err:.1e} relative, c_p {c16:.6} → {c32:.6}",
            roots[0], roots[1]
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        let mut s = preset("exp-cubic").unwrap();
        s.time.t_end = 1.0;
        s.output.dir = dir.path().join(run);
        let out = run_scenario(
            &s,
            &RunOptions {
                write: true,
                ..Default::default()
            },
        );
        if out.exit_code == 2 {
            return Err(format!("run failed: {:?}", out.report.error));
        }
        bytes.push(std::fs::read(s.output.dir.join("timeseries.csv")).map_err(|e| e.to_string())?);
    }
    ensure(
        bytes[0] == bytes[1] && !bytes[0].is_empty(),
        format!("two runs, {} identical bytes", bytes[0].len()),
    )
}

fn main() {
    let start = Instant::now();
    let runs: BTreeMap<&str, RunOutcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = PRESET_NAMES
            .iter()
            .map(|&name| (name, scope.spawn(move || run_preset(name, 0))))
            .collect();
        handles.into_iter().map(|(n, h)| (n, h.join().unwrap())).collect()
    });
    println!("preset runs done in {:.1} s", start.elapsed().as_secs_f64());

    let criteria: Vec<Criterion> = vec![
        ("dissipation identity", Box::new(dissipation_identity)),
        ("monotonicity", Box::new(|| monotonicity(&runs))),
        ("conservation", Box::new(|| conservation(&runs))),
        ("potential well", Box::new(|| potential_well(&runs))),
        ("log-Sobolev", Box::new(|| log_sobolev(&runs))),
        ("s|ln s| sweep", Box::new(s_log_sweep)),
        ("memory oracle", Box::new(memory_oracle)),
        ("decay envelopes", Box::new(|| decay_envelopes(&runs))),
        ("convexity machinery", Box::new(convexity)),
        ("spectral layer", Box::new(spectral_layer)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(d) => println!("criterion {:2} {name:<22} PASS  {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:2} {name:<22} FAIL  {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
