use std::f64::consts::PI;

use nlheat::evolve::{solve_ivp, verify_apriori, RunConfig, Scheme, Solution};
use nlheat::nets::member_data;
use nlheat::operator::{apply_l, bilinear_form, coercivity_margin, Floors, OperatorData};
use nlheat::spectral::{
    forward_transform, fractional_laplacian_half, inverse_transform, norms, Field, GridSpec,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Outcome of one property: `value` is compared against `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyResult {
    fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} (value {:.3e}, tolerance {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub properties: Vec<PropertyResult>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

fn white_noise(g: GridSpec, rng: &mut ChaCha8Rng) -> Field {
    Field::new(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("finite noise")
}

/// Random trigonometric polynomial with modes up to 8, below Nyquist, and `1/(1+|m|)` decay.
fn smooth_random(g: GridSpec, rng: &mut ChaCha8Rng) -> Field {
    let modes = 8.min(g.points as i64 / 2 - 1);
    let ys: Vec<i64> = if g.dimension == 2 { (0..=modes).collect() } else { vec![0] };
    let mut terms = Vec::new();
    for mx in 0..=modes {
        for &my in &ys {
            let amp = rng.gen_range(-1.0..1.0) / (1.0 + ((mx * mx + my * my) as f64).sqrt());
            terms.push((mx as f64, my as f64, amp, rng.gen_range(0.0..2.0 * PI)));
        }
    }
    let l = g.length;
    Field::from_fn(g, |x| {
        terms
            .iter()
            .map(|(mx, my, a, ph)| a * (2.0 * PI * (mx * x[0] + my * x[1]) / l + ph).cos())
            .sum()
    })
}

fn random_operator(g: GridSpec, s: f64, floors: Floors, rng: &mut ChaCha8Rng) -> OperatorData {
    let mut coeff = |floor: f64| smooth_random(g, rng).map(|v| floor + v.abs());
    let (a, b, c) = (coeff(floors.a0), coeff(floors.b0), coeff(floors.c0));
    OperatorData::new(a, b, c, s, floors).expect("random coefficients respect their floors")
}

/// Round trip, Plancherel and self-adjointness of the fractional multiplier.
fn spectral_identities(rng: &mut ChaCha8Rng) -> Vec<PropertyResult> {
    let (mut round, mut planch, mut adjoint, mut domination) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for d in [1, 2] {
        for n in [16, 64, 256] {
            let g = GridSpec::new(d, n, 2.0 * PI).expect("valid grid");
            let u = white_noise(g, rng);
            let v = white_noise(g, rng);
            let spec = forward_transform(&u);
            let back = inverse_transform(&spec).expect("symmetric spectrum");
            round = round.max(back.sub(&u).expect("same grid").sup_norm() / u.sup_norm());
            planch = planch.max((spec.l2_norm() - u.l2_norm()).abs() / u.l2_norm());
            for s in [0.25, 0.5, 0.75] {
                let lu = fractional_laplacian_half(&u, s).expect("valid order");
                let lv = fractional_laplacian_half(&v, s).expect("valid order");
                let left = lu.inner(&v).expect("same grid");
                let right = u.inner(&lv).expect("same grid");
                adjoint = adjoint.max((left - right).abs() / (lu.l2_norm() * v.l2_norm()));
            }
            for i in 0..g.len() {
                let k = g.wave_vector(i).norm();
                for j in 1..=9 {
                    let s = j as f64 / 10.0;
                    domination = domination.max(k.powf(2.0 * s) / (1.0 + k * k));
                }
            }
            // the smooth test field has no Nyquist content
            let w = smooth_random(g, rng);
            for j in 1..=9 {
                let nw = norms(&w, j as f64 / 10.0).expect("valid order");
                domination = domination.max(nw.hs_seminorm.powi(2) / nw.h1.powi(2));
            }
        }
    }
    vec![
        PropertyResult::at_most("spectral_round_trip", round, 1e-12),
        PropertyResult::at_most("spectral_plancherel", planch, 1e-12),
        PropertyResult::at_most("fractional_self_adjoint", adjoint, 1e-10),
        PropertyResult::at_most("fourier_domination", domination, 1.0 + 1e-12),
    ]
}

/// Duality `<Lu, v> = B(u, v)`, symmetry of `B` and coercivity over three coefficient sets.
fn form_properties(cfg: &ExperimentConfig, member: &OperatorData, rng: &mut ChaCha8Rng) -> Vec<PropertyResult> {
    let g = cfg.grid;
    let floors = member.floors();
    let sets = [
        member.clone(),
        OperatorData::constant(g, cfg.order, floors.a0, floors.b0, floors.c0).expect("valid floors"),
        random_operator(g, cfg.order, floors, rng),
    ];
    let (mut duality, mut symmetry, mut deficit) = (0.0f64, 0.0f64, 0.0f64);
    for p in &sets {
        for _ in 0..cfg.check.fields {
            let u = smooth_random(g, rng);
            let v = smooth_random(g, rng);
            let buv = bilinear_form(p, &u, &v).expect("same grid");
            let bvu = bilinear_form(p, &v, &u).expect("same grid");
            let buu = bilinear_form(p, &u, &u).expect("same grid");
            let bvv = bilinear_form(p, &v, &v).expect("same grid");
            let scale = (buu * bvv).sqrt();
            let luv = apply_l(p, &u).expect("same grid").inner(&v).expect("same grid");
            duality = duality.max((luv - buv).abs() / scale);
            symmetry = symmetry.max((buv - bvu).abs() / scale);
            let margin = coercivity_margin(p, &u).expect("same grid");
            deficit = deficit.max(-margin / buu);
        }
    }
    vec![
        PropertyResult::at_most("form_duality", duality, 1e-10),
        PropertyResult::at_most("form_symmetry", symmetry, 1e-10),
        PropertyResult::at_most("coercivity_deficit", deficit + 0.0, 1e-10),
    ]
}

#[derive(Default)]
struct EnergyTally {
    l2_rise: f64,
    total_rise: f64,
    apriori_ratio: f64,
}

impl EnergyTally {
    fn record(&mut self, p: &OperatorData, solution: &Solution, u0: &Field) {
        let b = &solution.trace.breakdowns;
        for w in b.windows(2) {
            self.l2_rise = self.l2_rise.max((w[1].l2_sq - w[0].l2_sq) / w[0].l2_sq.max(f64::MIN_POSITIVE));
            self.total_rise = self.total_rise.max((w[1].total - w[0].total) / w[0].total.max(f64::MIN_POSITIVE));
        }
        let apriori = verify_apriori(p, solution, u0).expect("solution carries its own trace");
        if apriori.rhs > 0.0 {
            self.apriori_ratio = self.apriori_ratio.max(apriori.lhs_max / apriori.rhs);
        }
    }
}

/// Energy laws on the configured member and on randomised small runs, all with backward Euler.
fn energy_properties(
    cfg: &ExperimentConfig,
    member: &OperatorData,
    u0: &Field,
    rng: &mut ChaCha8Rng,
) -> nlheat::Result<Vec<PropertyResult>> {
    let mut tally = EnergyTally::default();
    let run = RunConfig {
        scheme: Scheme::BackwardEuler,
        ..cfg.run
    };
    let solution = solve_ivp(member, u0, &run)?;
    tally.record(member, &solution, u0);

    let g = GridSpec::new(1, 64, 2.0 * PI)?;
    let small = RunConfig::new(0.2, 0.02, Scheme::BackwardEuler);
    for _ in 0..cfg.check.random_runs {
        let s = rng.gen_range(0.1..0.9);
        let floors = Floors {
            a0: rng.gen_range(0.2..2.0),
            b0: rng.gen_range(0.2..2.0),
            c0: rng.gen_range(0.2..2.0),
        };
        let p = random_operator(g, s, floors, rng);
        let u = smooth_random(g, rng);
        let solution = solve_ivp(&p, &u, &small)?;
        tally.record(&p, &solution, &u);
    }
    Ok(vec![
        PropertyResult::at_most("energy_l2_contraction", tally.l2_rise, 1e-9),
        PropertyResult::at_most("energy_total_monotone", tally.total_rise, 1e-9),
        PropertyResult::at_most("apriori_bound", tally.apriori_ratio, 1.0 + 1e-9),
    ])
}

/// Runs the property suite. Only solver failures are errors; failing properties are reported.
pub fn run_check(cfg: &ExperimentConfig) -> nlheat::Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let net = cfg.net_config();
    let eps = *net.epsilon_plan().used.last().expect("validated configs plan at least one epsilon");
    let data = member_data(&net, eps)?;
    let mut properties = spectral_identities(&mut rng);
    properties.extend(form_properties(cfg, &data.operator, &mut rng));
    properties.extend(energy_properties(cfg, &data.operator, &data.u0, &mut rng)?);
    Ok(CheckReport { properties })
}
