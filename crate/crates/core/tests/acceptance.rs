//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Run all criteria with `cargo test -p xymagic --test acceptance`, or a
//! subset with `-- 4 9`. Failures are reported, not fatal; set
//! `XYMAGIC_ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.

use std::f64::consts::SQRT_2;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use xymagic::analysis::crossover::{crossover_map, CrossoverOptions};
use xymagic::analysis::finite_size::{fss_collapse, size_scan, CollapseOptions, CollapseResult};
use xymagic::analysis::fit::lin_space;
use xymagic::analysis::global::global_magic_peak;
use xymagic::analysis::single_site::{
    beta_z_fit, delta_lambda_c_scaling, derivative_exponent, fgs_point, h_state_fidelity, mpp_locate, rom_peak,
    MppOptions,
};
use xymagic::analysis::symmetric::{
    kappa_fit, log_divergence_vs_distance, mrp_scaling, rom_vs_temperature, sudden_death_temperature, two_site_rom,
    MrpOptions, Side, SuddenDeathOptions,
};
use xymagic::chain::FiniteChainSpec;
use xymagic::correlators::{correlator_set, single_site_state, ChainParams};
use xymagic::rom::NONZERO_THRESHOLD;
use xymagic::state::{h_state, tensor_product, PauliVector};
use xymagic::{rom_closed_form, rom_lp, StabilizerPolytope};

// Criterion 1
const CLOSED_FORM_TOL: f64 = 1e-8;
const CLOSED_FORM_SAMPLES: usize = 1000;
// Criterion 2
const H_TOL: f64 = 1e-9;
const HH_TOL: f64 = 1e-6;
// Criterion 4
const ISING_MPP: f64 = 1.00015;
const ISING_MPP_TOL: f64 = 5e-5;
const ISING_PEAK: f64 = 1.13;
const ISING_PEAK_TOL: f64 = 0.01;
const ISING_MU: f64 = 0.88;
const ISING_MU_TOL: f64 = 0.03;
const MU_WINDOW: (f64, f64) = (1e-3, 1e-1);
// Criterion 5
const FGS_GAMMA: f64 = 1.0 / 3.0;
const FGS_PEAK: f64 = 1.06;
const FGS_PEAK_TOL: f64 = 0.01;
const FGS_VALUE_TOL: f64 = 1e-4;
const FGS_PURITY: f64 = 0.9999;
// Criterion 6
const DETUNE_LAMBDA: f64 = 0.02;
const DETUNE_GAMMA: f64 = 0.10;
const FIDELITY_TOL: f64 = 1e-3;
// Criterion 7
const DELTA_EXPONENT: f64 = 5.55;
const DELTA_EXPONENT_TOL: f64 = 0.3;
// Criterion 8
const BETA_Z_BAND: (f64, f64) = (0.8, 0.9);
const BETA_Z_WINDOW: (f64, f64) = (1e-4, 1e-2);
const BETA_Z_GAMMAS: [f64; 4] = [0.4, 0.6, 0.8, 1.0];
// Criterion 9
const FSS_SIZES: [usize; 4] = [8, 12, 16, 20];
const FSS_TARGETS: [(f64, (f64, f64), f64); 2] = [(1.0, (0.88, 1.00), 0.10), (0.5, (0.86, 1.09), 0.15)];
const FSS_IMPROVEMENT: f64 = 5.0;
// Criterion 10
const LOG_WINDOW: (f64, f64) = (1e-3, 1e-1);
const LOG_R2: f64 = 0.95;
// Criterion 11
const MRP_DISTANCES: [usize; 8] = [8, 10, 12, 14, 17, 20, 25, 30];
const MRP_R2: f64 = 0.95;
// Criterion 12
const GROUND_STATE_TOL: f64 = 1e-5;
const COLD: f64 = 1e-3;
const HOT: f64 = 1e3;
const SUDDEN_DEATH_DISTANCES: [usize; 6] = [1, 2, 3, 5, 8, 10];
// Criterion 13
const A_BAND: (f64, f64) = (0.45, 0.65);
const B_BAND: (f64, f64) = (0.2, 0.4);
/// "Much less than one".
const GRUNEISEN_MAX: f64 = 0.1;
const HALVING_TOL: f64 = 0.05;
// Criterion 14
const GLOBAL_SITES: usize = 16;
const GLOBAL_RESOLUTION: f64 = 1e-4;
/// Slow decay: the r = 5 peak keeps at least this fraction of r = 1.
const GLOBAL_DECAY_FLOOR: f64 = 0.5;

type Check = Result<(bool, String), xymagic::Error>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn inside(x: f64, band: (f64, f64)) -> bool {
    x >= band.0 && x <= band.1
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISS"
    }
}

fn closed_form() -> Check {
    let poly = StabilizerPolytope::cached(1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..CLOSED_FORM_SAMPLES {
        let radius = rng.random::<f64>().sqrt();
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let (x, z) = (radius * angle.cos(), radius * angle.sin());
        let lp = rom_lp(&PauliVector::bloch(x, 0.0, z)?, poly)?.value;
        worst = worst.max((lp - rom_closed_form(x, z)?).abs());
    }
    Ok((
        worst <= CLOSED_FORM_TOL,
        format!("max |LP - closed form| = {worst:.2e} over {CLOSED_FORM_SAMPLES} states"),
    ))
}

fn extremal() -> Check {
    let h = rom_lp(&h_state(), StabilizerPolytope::cached(1)?)?.value;
    let hh = rom_lp(&tensor_product(&h_state(), &h_state())?, StabilizerPolytope::cached(2)?)?.value;
    let (eh, ehh) = ((h - (SQRT_2 - 1.0)).abs(), (hh - (3.0 * SQRT_2 - 2.0) / 3.0).abs());
    Ok((
        eh <= H_TOL && ehh <= HH_TOL,
        format!("R(H) = {h:.12} (err {eh:.1e}), R(H⊗H) = {hh:.9} (err {ehh:.1e})"),
    ))
}

fn stabilizer_counts() -> Check {
    let one = StabilizerPolytope::enumerate(1)?;
    let two = StabilizerPolytope::enumerate(2)?;
    let closed = one.is_closed_under_generators() && two.is_closed_under_generators();
    Ok((
        one.len() == 6 && two.len() == 60 && closed,
        format!("{} and {} states, closed under generators: {closed}", one.len(), two.len()),
    ))
}

fn ising_numbers() -> Check {
    let mpp = mpp_locate(1.0, &MppOptions::default())?.lambda;
    let peak = rom_peak(1.0, xymagic::correlators::DEFAULT_QUAD_TOL)?;
    let (_, fit) = derivative_exponent(1.0, 1.0, MU_WINDOW, 15)?;
    let mu = -fit.exponent;
    let oks = [
        within(mpp, ISING_MPP, ISING_MPP_TOL),
        within(peak.lambda, ISING_PEAK, ISING_PEAK_TOL),
        within(mu, ISING_MU, ISING_MU_TOL),
    ];
    Ok((
        oks.iter().all(|&b| b),
        format!(
            "λ_c* = {mpp:.6} [{}], λ_max = {:.4} [{}], μ = {mu:.3} (r² {:.3}) [{}]",
            mark(oks[0]),
            peak.lambda,
            mark(oks[1]),
            fit.r_squared,
            mark(oks[2])
        ),
    ))
}

fn fgs_magic() -> Check {
    let peak = rom_peak(FGS_GAMMA, xymagic::correlators::DEFAULT_QUAD_TOL)?;
    let fgs = fgs_point(FGS_GAMMA)?;
    let purity = single_site_state(&ChainParams::new(fgs, FGS_GAMMA))?.purity();
    let oks = [
        within(peak.lambda, FGS_PEAK, FGS_PEAK_TOL),
        within(peak.value, SQRT_2 - 1.0, FGS_VALUE_TOL),
        within(fgs, 3.0 / (2.0 * SQRT_2), 1e-12),
        purity >= FGS_PURITY,
    ];
    Ok((
        oks.iter().all(|&b| b),
        format!(
            "λ_max = {:.5}, R_max = {:.8}, λ_FGS = {fgs:.8}, purity {purity:.8}",
            peak.lambda, peak.value
        ),
    ))
}

fn detuning() -> Check {
    let (l0, g0) = (fgs_point(FGS_GAMMA)?, FGS_GAMMA);
    let f0 = h_state_fidelity(l0, g0)?;
    let mut worst: f64 = 0.0;
    for (l, g) in [
        (l0 * (1.0 + DETUNE_LAMBDA), g0),
        (l0 * (1.0 - DETUNE_LAMBDA), g0),
        (l0, g0 * (1.0 + DETUNE_GAMMA)),
        (l0, g0 * (1.0 - DETUNE_GAMMA)),
    ] {
        worst = worst.max((h_state_fidelity(l, g)? - f0).abs() / f0);
    }
    Ok((
        worst < FIDELITY_TOL,
        format!("F(λ₀,γ₀) = {f0:.8}, largest relative change {worst:.2e}"),
    ))
}

fn delta_power_law() -> Check {
    let opts = MppOptions {
        resolution: 1e-13,
        ..Default::default()
    };
    let (_, fit) = delta_lambda_c_scaling(&lin_space(0.3, 1.0, 8), &opts)?;
    Ok((
        within(fit.exponent, DELTA_EXPONENT, DELTA_EXPONENT_TOL),
        format!("exponent {:.3} (r² {:.4}) over 8 γ in [0.3, 1]", fit.exponent, fit.r_squared),
    ))
}

fn beta_z() -> Check {
    let mut hits = 0;
    let mut detail = Vec::new();
    for g in BETA_Z_GAMMAS {
        let b = beta_z_fit(g, BETA_Z_WINDOW, 15)?.exponent;
        hits += inside(b, BETA_Z_BAND) as usize;
        detail.push(format!("γ {g}: {b:.3}"));
    }
    Ok((hits >= 4, format!("{} ({hits} in band)", detail.join(", "))))
}

fn distance(r: &CollapseResult, target: (f64, f64)) -> f64 {
    (r.mu - target.0).hypot(r.nu - target.1)
}

fn fss() -> Check {
    let opts = CollapseOptions::default();
    let lambdas = lin_space(0.6, 1.5, 37);
    let mut pass = true;
    let mut detail = Vec::new();
    for (gamma, target, band) in FSS_TARGETS {
        let curves = FSS_SIZES
            .iter()
            .map(|&n| size_scan(&FiniteChainSpec::pinned(n, 1.0, gamma), &lambdas).map(|s| s.curve()))
            .collect::<Result<Vec<_>, _>>()?;
        let all = fss_collapse(&curves, &opts)?;
        let small = fss_collapse(&curves[..3], &opts)?;
        let large = fss_collapse(&curves[1..], &opts)?;
        let in_band = within(all.mu, target.0, band) && within(all.nu, target.1, band);
        let converging = distance(&large, target) < distance(&small, target);
        let improved = all.improvement() >= FSS_IMPROVEMENT;
        pass &= (in_band || converging) && improved;
        detail.push(format!(
            "γ {gamma}: (μ,ν) = ({:.3},{:.3}) band [{}], distance {:.3} → {:.3} for sizes 8–16 → 12–20 [{}], improvement {:.1}x [{}]",
            all.mu,
            all.nu,
            mark(in_band),
            distance(&small, target),
            distance(&large, target),
            mark(converging),
            all.improvement(),
            mark(improved)
        ));
    }
    Ok((pass, detail.join("; ")))
}

fn log_divergence() -> Check {
    let distances: Vec<usize> = (1..=15).collect();
    let scaling = log_divergence_vs_distance(1.0, &distances, Side::Ordered, LOG_WINDOW, 8)?;
    let (s1, s10) = (scaling.slopes[0].1, scaling.slopes[9].1);
    let r2 = scaling.fit.r_squared;
    Ok((
        s1 > 0.0 && s10 < 0.0 && r2 > LOG_R2,
        format!("slope {s1:+.3} at r=1, {s10:+.3} at r=10; tanh fit r² {r2:.4}"),
    ))
}

fn mrp_drift() -> Check {
    let (samples, fit) = mrp_scaling(1.0, &MRP_DISTANCES, &MrpOptions::default())?;
    let ends = (samples[0].1, samples[samples.len() - 1].1);
    Ok((
        fit.r_squared > MRP_R2,
        format!(
            "λ_MRP − 1 from {:.4} (r=8) to {:.4} (r=30), ln r fit r² {:.3}",
            ends.0, ends.1, fit.r_squared
        ),
    ))
}

fn thermal() -> Check {
    let base = ChainParams::new(1.0, 1.0).with_distance(1);
    let temps = lin_space(0.0, 3.0, 61);
    let rom = rom_vs_temperature(&base, &temps)?;
    let monotone = rom.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let t_c = sudden_death_temperature(&base, &SuddenDeathOptions::default())?;
    let dead = temps.iter().zip(&rom).filter(|(t, _)| **t > t_c).all(|(_, r)| *r <= NONZERO_THRESHOLD);

    let (samples, _) = kappa_fit(1.0, &SUDDEN_DEATH_DISTANCES, &SuddenDeathOptions::default())?;
    let decreasing = samples.windows(2).all(|w| w[1].1 < w[0].1);

    let mut cold_err: f64 = 0.0;
    for lambda in [0.5, 1.0, 1.5] {
        for r in [1, 3] {
            let p = ChainParams::new(lambda, 1.0).with_distance(r);
            let (zero, cold) = (correlator_set(&p)?, correlator_set(&p.with_temperature(COLD))?);
            for (a, b) in [(zero.sz, cold.sz), (zero.xx, cold.xx), (zero.yy, cold.yy), (zero.zz, cold.zz)] {
                cold_err = cold_err.max((a - b).abs());
            }
        }
    }
    let hot = two_site_rom(&base.with_temperature(HOT))?;
    let oks = [monotone && dead, decreasing, cold_err <= GROUND_STATE_TOL, hot == 0.0];
    Ok((
        oks.iter().all(|&b| b),
        format!(
            "R(T) monotone with T_c = {t_c:.4} [{}], T_c(r) decreasing {:.3} → {:.3} [{}], T={COLD} error {cold_err:.1e} [{}], R(T={HOT}) = {hot} [{}]",
            mark(oks[0]),
            samples[0].1,
            samples[samples.len() - 1].1,
            mark(oks[1]),
            mark(oks[2]),
            mark(oks[3])
        ),
    ))
}

fn crossover() -> Check {
    let lambdas = lin_space(0.7, 1.3, 60);
    let temps = lin_space(0.01, 0.6, 60);
    let mut pass = true;
    let mut detail = Vec::new();
    for r in [1, 10] {
        let map = crossover_map(1.0, r, &lambdas, &temps, &CrossoverOptions::default())?;
        let oks = [
            inside(map.t_star.slope, A_BAND),
            inside(map.t_mixed.slope, B_BAND),
            map.fan_gruneisen_median < GRUNEISEN_MAX,
            map.max_halving_disagreement <= HALVING_TOL,
        ];
        pass &= oks.iter().all(|&b| b);
        detail.push(format!(
            "r {r}: a {:.3} [{}], b {:.3} [{}], fan Grüneisen {:.3} [{}], halving {:.3} [{}]",
            map.t_star.slope,
            mark(oks[0]),
            map.t_mixed.slope,
            mark(oks[1]),
            map.fan_gruneisen_median,
            mark(oks[2]),
            map.max_halving_disagreement,
            mark(oks[3])
        ));
    }
    Ok((pass, detail.join("; ")))
}

fn global_peak() -> Check {
    let base = FiniteChainSpec::pinned(GLOBAL_SITES, 1.0, 1.0);
    let grid = lin_space(0.6, 1.6, 21);
    let near = global_magic_peak(&base, 1, &grid, GLOBAL_RESOLUTION)?;
    let far = global_magic_peak(&base, 5, &grid, GLOBAL_RESOLUTION)?;
    let at_onset = |p: &xymagic::analysis::global::GlobalMagicPeak| {
        (p.lambda_peak - p.product_onset).abs() <= GLOBAL_RESOLUTION
    };
    let ratio = far.peak / near.peak;
    let decays = ratio < 1.0 && ratio >= GLOBAL_DECAY_FLOOR;
    Ok((
        at_onset(&near) && at_onset(&far) && decays,
        format!(
            "N={GLOBAL_SITES}: r=1 peak {:.4} at {:.5} (onset {:.5}), r=5 peak {:.4} at {:.5} (onset {:.5}), ratio {ratio:.3}",
            near.peak, near.lambda_peak, near.product_onset, far.peak, far.lambda_peak, far.product_onset
        ),
    ))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "closed-form oracle", budget: Duration::from_secs(5), run: closed_form },
        Criterion { id: 2, name: "extremal magic", budget: Duration::from_secs(1), run: extremal },
        Criterion { id: 3, name: "stabilizer counts", budget: Duration::from_secs(10), run: stabilizer_counts },
        Criterion { id: 4, name: "Ising criticality", budget: Duration::from_secs(120), run: ising_numbers },
        Criterion { id: 5, name: "factorizing-field magic", budget: Duration::from_secs(120), run: fgs_magic },
        Criterion { id: 6, name: "detuning robustness", budget: Duration::from_secs(60), run: detuning },
        Criterion { id: 7, name: "MPP shift power law", budget: Duration::from_secs(600), run: delta_power_law },
        Criterion { id: 8, name: "transverse exponent", budget: Duration::from_secs(120), run: beta_z },
        Criterion { id: 9, name: "finite-size collapse", budget: Duration::from_secs(1800), run: fss },
        Criterion { id: 10, name: "log divergence", budget: Duration::from_secs(900), run: log_divergence },
        Criterion { id: 11, name: "MRP drift", budget: Duration::from_secs(900), run: mrp_drift },
        Criterion { id: 12, name: "thermal behavior", budget: Duration::from_secs(600), run: thermal },
        Criterion { id: 13, name: "crossover structure", budget: Duration::from_secs(1800), run: crossover },
        Criterion { id: 14, name: "global magic peak", budget: Duration::from_secs(1200), run: global_peak },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let strict = std::env::var("XYMAGIC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");

    let mut failures = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_budget = elapsed <= c.budget;
        let pass = ok && in_budget;
        failures += !pass as usize;
        println!(
            "criterion {:>2} {}: {} ({detail}; {:.1}s of {}s budget)",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!("acceptance: {failures} failing");
    if strict && failures > 0 {
        std::process::exit(1);
    }
}
