//! Seeded randomized campaigns against the exact engine.
//!
//! Two kinds of runs live here:
//!
//! * **theorem hunts** — generate random instances and check statements that
//!   are theorems for them (Galmarino equality, stopping-time equivalence,
//!   observational consistency, monotone information, the lattice ⇒
//!   supermartingale linkage, the conditional esssup exchange, the Snell
//!   bridge). Any violation is a bug and is reported with the serialized
//!   instance.
//! * **mutation tests** — corrupt a valid system (enlarge a class, merge two
//!   classes, delete a gluing control) and check that the corruption is
//!   caught by validation, by a lattice failure or by a supermartingale
//!   witness.
//!
//! Campaigns are deterministic: instance `i` of a run with seed `s` draws
//! from an independent substream `(s, i)`.
//!
//! The generated control systems are strategy families over a random
//! observation environment: a shared prefix of fixed actions, one stage
//! carrying the strategy variation (per-atom action choices forming a
//! product set, hence closed under observable gluing), and a fixed suffix.
//! Payoffs are per-stage action rewards, so gluing two strategies on an
//! observable event glues their payoffs. This makes the strong lattice
//! condition C1 hold by construction, which is exactly what the
//! lattice/Bellman linkage campaign needs: C2, C3 and B1 then follow by
//! theorem and are asserted, not assumed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{
    consistency_theorem_check, derive_prefix_classes, lattice_check, validate, verify_bellman,
    Control, ControlTime, FiniteControlSystem,
};
use crate::finite::{ProbMeasure, RandomVariable, SampleSpace, SigmaField};
use crate::models::{build_optimal_stopping, snell_crosscheck};
use crate::process::{
    as_variants_check, field_sets, galmarino_check, information_monotone, is_stopping_time,
    natural_filtration, observational_consistency, sigma_generated_of_stopped,
    stopped_field_family, stopping_time_equivalence, DiscreteProcess, RandomTime, TimeValue,
};
use crate::rational::{int, rat, Rational};
use crate::{Error, Result};

fn substream(seed: u64, instance: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    rng
}

// ---------------------------------------------------------------------------
// Instance generators
// ---------------------------------------------------------------------------

/// Random process with values in `0..alphabet`; small alphabets force value
/// collisions and hence coarse σ-fields.
pub fn gen_process(rng: &mut ChaCha8Rng, n: usize, horizon: usize, alphabet: i64) -> DiscreteProcess {
    DiscreteProcess::new(
        (0..n)
            .map(|_| (0..=horizon).map(|_| int(rng.gen_range(0..alphabet))).collect())
            .collect(),
    )
    .expect("rectangular by construction")
}

/// Random measure from small integer weights; optionally forces one null
/// outcome (when `n ≥ 2`).
pub fn gen_measure(rng: &mut ChaCha8Rng, n: usize, force_null: bool) -> ProbMeasure {
    loop {
        let mut raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        if force_null && n >= 2 {
            raw[rng.gen_range(0..n)] = 0;
        }
        let total: i64 = raw.iter().sum();
        if total == 0 {
            continue;
        }
        if force_null && !raw.contains(&0) {
            continue;
        }
        let weights = raw.into_iter().map(|w| rat(w, total)).collect();
        return ProbMeasure::new(weights).expect("normalized weights");
    }
}

/// Random stopping time of `f`: per stage, each still-running atom stops
/// with probability ~1/3; survivors are split between the horizon and ∞.
pub fn gen_stopping_time(rng: &mut ChaCha8Rng, f: &crate::finite::Filtration) -> RandomTime {
    let n = f.space_size();
    let h = f.horizon();
    let mut values = vec![None; n];
    for t in 0..=h {
        for atom in f.stage(t).atoms() {
            if atom.iter().any(|&i| values[i].is_some()) {
                continue;
            }
            if rng.gen_bool(1.0 / 3.0) {
                for &i in atom {
                    values[i] = Some(TimeValue::Finite(t));
                }
            }
        }
    }
    // Remaining atoms at the terminal stage: horizon or ∞, per atom.
    for atom in f.terminal().atoms() {
        if atom.iter().any(|&i| values[i].is_some()) {
            continue;
        }
        let v = if rng.gen_bool(0.5) { TimeValue::Finite(h) } else { TimeValue::Infinite };
        for &i in atom {
            values[i] = Some(v);
        }
    }
    RandomTime::new(values.into_iter().map(|v| v.expect("all atoms assigned")).collect())
}

/// Arbitrary random time, usually not a stopping time.
pub fn gen_random_time(rng: &mut ChaCha8Rng, n: usize, horizon: usize) -> RandomTime {
    RandomTime::new(
        (0..n)
            .map(|_| {
                let v = rng.gen_range(0..=horizon as i64 + 1);
                if v > horizon as i64 {
                    TimeValue::Infinite
                } else {
                    TimeValue::Finite(v as usize)
                }
            })
            .collect(),
    )
}

fn describe_instance(x: &DiscreteProcess, s: &RandomTime) -> String {
    let rows: Vec<String> = (0..x.outcomes())
        .map(|i| {
            let vals: Vec<String> = (0..=x.horizon())
                .map(|t| crate::rational::format_fraction(x.value(i, t)))
                .collect();
            format!("[{}]", vals.join(","))
        })
        .collect();
    let times: Vec<String> = s.values().iter().map(|v| v.to_string()).collect();
    format!("x = {} s = [{}]", rows.join(""), times.join(","))
}

// ---------------------------------------------------------------------------
// Galmarino / informational-consistency campaign
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GalmarinoConfig {
    pub instances: u64,
    pub max_outcomes: usize,
    pub max_horizon: usize,
    pub seed: u64,
    /// Also test arbitrary (usually non-stopping) times and record how the
    /// would-be conclusion fails without the stopping hypothesis.
    pub allow_nonstopping: bool,
}

impl Default for GalmarinoConfig {
    fn default() -> Self {
        Self { instances: 500, max_outcomes: 8, max_horizon: 5, seed: 7, allow_nonstopping: false }
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub instance: u64,
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct GalmarinoCampaignReport {
    pub instances: u64,
    pub checks_run: u64,
    /// Theorem violations: must stay empty.
    pub violations: Vec<Violation>,
    /// With `allow_nonstopping`: instances where dropping the stopping
    /// hypothesis broke the σ(X^S) = F^X_S conclusion, as expected.
    pub hypothesis_needed: Vec<Violation>,
}

impl GalmarinoCampaignReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs the randomized informational-consistency campaign.
pub fn run_galmarino_campaign(cfg: &GalmarinoConfig) -> Result<GalmarinoCampaignReport> {
    if cfg.max_outcomes < 2 || cfg.max_horizon < 1 {
        return Err(Error::Config("campaign needs ≥ 2 outcomes and horizon ≥ 1".into()));
    }
    let mut report = GalmarinoCampaignReport { instances: cfg.instances, ..Default::default() };
    for inst in 0..cfg.instances {
        let mut rng = substream(cfg.seed, inst);
        let n = rng.gen_range(2..=cfg.max_outcomes);
        let h = rng.gen_range(1..=cfg.max_horizon);
        let alphabet = rng.gen_range(2..=3);
        let x = gen_process(&mut rng, n, h, alphabet);
        let f = natural_filtration(&x);
        let s = gen_stopping_time(&mut rng, &f);
        let fail = |check: &str, detail: String| Violation {
            instance: inst,
            check: check.into(),
            detail,
        };

        // Generalized Galmarino: σ(X^S) = F^X_S exactly.
        let g = galmarino_check(&x, &s)?;
        report.checks_run += 1;
        if !g.holds() {
            report.violations.push(fail("galmarino", describe_instance(&x, &s)));
        }

        // Stopping-time equivalence, for the stopping time and for an
        // arbitrary time (where both verdicts are usually false).
        for candidate in [s.clone(), gen_random_time(&mut rng, n, h)] {
            let (a, b) = stopping_time_equivalence(&x, &candidate)?;
            report.checks_run += 1;
            if a != b {
                report
                    .violations
                    .push(fail("stopping-time-equivalence", describe_instance(&x, &candidate)));
            }
        }

        // Observational consistency: glue an arbitrary continuation after S.
        let y = glue_after(&mut rng, &x, &s, alphabet);
        report.checks_run += 1;
        if !observational_consistency(&x, &y, &s)? {
            report.violations.push(fail("observational-consistency", describe_instance(&x, &s)));
        }

        // Monotone information along nested stopping times.
        let s2 = gen_stopping_time(&mut rng, &f);
        let u = RandomTime::new(
            (0..n).map(|i| s.value(i).min(s2.value(i))).collect(),
        );
        let v = RandomTime::new(
            (0..n).map(|i| s.value(i).max(s2.value(i))).collect(),
        );
        report.checks_run += 1;
        if !information_monotone(&x, &u, &v)? {
            report.violations.push(fail("information-monotone", describe_instance(&x, &v)));
        }

        // Almost-sure variants under a measure with a null outcome: perturb
        // the time and the glued process on null outcomes only.
        let mu = gen_measure(&mut rng, n, true);
        let mut s_pert = s.values().to_vec();
        let mut y_pert_rows: Vec<Vec<Rational>> =
            (0..n).map(|i| (0..=h).map(|t| y.value(i, t).clone()).collect()).collect();
        for i in 0..n {
            if mu.is_null(i) {
                s_pert[i] = gen_random_time(&mut rng, 1, h).value(0);
                for cell in y_pert_rows[i].iter_mut() {
                    *cell = int(rng.gen_range(0..alphabet));
                }
            }
        }
        let s_pert = RandomTime::new(s_pert);
        let y_pert = DiscreteProcess::new(y_pert_rows).expect("rectangular");
        report.checks_run += 1;
        match as_variants_check(&mu, &x, &y_pert, &s_pert) {
            Ok(true) => {}
            Ok(false) => {
                report.violations.push(fail("as-variants", describe_instance(&x, &s_pert)));
            }
            Err(e) => {
                report
                    .violations
                    .push(fail("as-variants-precondition", format!("{e}: {}", describe_instance(&x, &s_pert))));
            }
        }

        // Dropped hypothesis: for a non-stopping time the admissible-set
        // family generally differs from the sets of σ(X^S).
        if cfg.allow_nonstopping {
            let r = gen_random_time(&mut rng, n, h);
            if !is_stopping_time(&r, &f)? {
                let family = stopped_field_family(&f, &r)?;
                let sigma = sigma_generated_of_stopped(&x, &r)?;
                let mut family_sorted = family;
                family_sorted.sort();
                if family_sorted != field_sets(&sigma) {
                    report.hypothesis_needed.push(Violation {
                        instance: inst,
                        check: "nonstopping-mismatch".into(),
                        detail: describe_instance(&x, &r),
                    });
                }
            }
        }
    }
    Ok(report)
}

/// A process equal to `x` up to and including `s`, arbitrary strictly after.
fn glue_after(
    rng: &mut ChaCha8Rng,
    x: &DiscreteProcess,
    s: &RandomTime,
    alphabet: i64,
) -> DiscreteProcess {
    let rows = (0..x.outcomes())
        .map(|i| {
            (0..=x.horizon())
                .map(|t| match s.value(i) {
                    TimeValue::Finite(v) if t > v => int(rng.gen_range(0..alphabet)),
                    _ => x.value(i, t).clone(),
                })
                .collect()
        })
        .collect();
    DiscreteProcess::new(rows).expect("rectangular")
}

// ---------------------------------------------------------------------------
// Coherent-system generator
// ---------------------------------------------------------------------------

/// A generated strategy-family system plus the structure the mutation
/// campaign needs to corrupt it meaningfully.
#[derive(Debug, Clone)]
pub struct GeneratedSystem {
    pub system: FiniteControlSystem,
    /// Stage carrying the strategy variation.
    pub vary_stage: usize,
    /// Atoms of the decision field at `vary_stage - 1` that carry a free
    /// binary choice (indices into that field's atom list).
    pub free_atoms: Vec<usize>,
    /// Action chosen by each control on each free atom (control-major).
    pub choices: Vec<Vec<u8>>,
    /// Per-stage per-action reward tables, `rewards[t][a-1][outcome]`.
    pub rewards: Vec<Vec<Vec<Rational>>>,
    /// Whether the two actions were generated with observation tables
    /// generating identical σ-fields (shared information across controls).
    pub shadow: bool,
}

/// Draws a coherent system closed under observable gluing.
///
/// `shadow` makes the two actions' observations carry the same σ-fields at
/// every stage (value-relabelled tables), so every control shares one
/// filtration; class corruptions then slip past the stability check and must
/// be caught by the lattice or the supermartingale property.
pub fn gen_coherent_system(
    rng: &mut ChaCha8Rng,
    max_outcomes: usize,
    max_horizon: usize,
    shadow: bool,
) -> GeneratedSystem {
    let n = rng.gen_range(2..=max_outcomes.max(2));
    let h = rng.gen_range(1..=max_horizon.max(1));
    let with_null = rng.gen_bool(0.25);
    let measure = gen_measure(rng, n, with_null);

    // Observation tables per stage and action.
    let alphabet = 3i64;
    let mut obs: Vec<[Vec<i64>; 2]> = Vec::with_capacity(h + 1);
    obs.push([vec![0; n], vec![0; n]]); // stage 0 observes nothing
    for _ in 1..=h {
        let first: Vec<i64> = (0..n).map(|_| rng.gen_range(0..alphabet)).collect();
        let second: Vec<i64> = if shadow {
            // Injective relabelling keeps the generated σ-field identical.
            let relabel: Vec<i64> = {
                let mut m: Vec<i64> = (0..alphabet).collect();
                for k in (1..m.len()).rev() {
                    m.swap(k, rng.gen_range(0..=k));
                }
                m
            };
            first.iter().map(|&v| relabel[v as usize]).collect()
        } else {
            (0..n).map(|_| rng.gen_range(0..alphabet)).collect()
        };
        obs.push([first, second]);
    }

    // Reward tables per stage and action: denominators up to 3 break ties.
    let mut rewards: Vec<Vec<Vec<Rational>>> = Vec::with_capacity(h + 1);
    rewards.push(vec![vec![Rational::from_integer(0.into()); n]; 2]);
    for _ in 1..=h {
        rewards.push(
            (0..2)
                .map(|_| {
                    (0..n)
                        .map(|_| rat(rng.gen_range(-8..=8), rng.gen_range(1..=3)))
                        .collect()
                })
                .collect(),
        );
    }

    // Shared prefix and suffix actions; one varying stage.
    let vary_stage = rng.gen_range(1..=h);
    let fixed: Vec<u8> = (0..=h).map(|_| rng.gen_range(1..=2) as u8).collect();

    // Decision field: what has been observed before the varying stage.
    let prefix_process = DiscreteProcess::new(
        (0..n)
            .map(|i| {
                (0..vary_stage)
                    .map(|t| int(obs[t][fixed[t] as usize - 1][i]))
                    .collect()
            })
            .collect(),
    )
    .expect("rectangular");
    let decision_field = natural_filtration(&prefix_process).terminal().clone();

    // Give one or two atoms a free binary choice, capping |C| at 4.
    let atom_count = decision_field.atom_count();
    let mut atom_order: Vec<usize> = (0..atom_count).collect();
    for k in (1..atom_order.len()).rev() {
        atom_order.swap(k, rng.gen_range(0..=k));
    }
    let free = 1 + usize::from(atom_count > 1 && rng.gen_bool(0.5));
    let free_atoms: Vec<usize> = atom_order.into_iter().take(free).collect();

    // Controls: one per assignment of actions to free atoms.
    let combos: Vec<Vec<u8>> = match free_atoms.len() {
        1 => vec![vec![1], vec![2]],
        _ => vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]],
    };
    let mut controls = Vec::with_capacity(combos.len());
    let mut action_processes = Vec::with_capacity(combos.len());
    for combo in &combos {
        let action_at = |t: usize, i: usize| -> u8 {
            if t != vary_stage {
                return fixed[t];
            }
            let atom = decision_field.atom_index(i);
            match free_atoms.iter().position(|&a| a == atom) {
                Some(k) => combo[k],
                None => fixed[t],
            }
        };
        let mut obs_rows = Vec::with_capacity(n);
        let mut act_rows = Vec::with_capacity(n);
        let mut payoff = Vec::with_capacity(n);
        for i in 0..n {
            let mut orow = Vec::with_capacity(h + 1);
            let mut arow = Vec::with_capacity(h + 1);
            let mut total = Rational::from_integer(0.into());
            for t in 0..=h {
                let a = action_at(t, i);
                orow.push(if t == 0 { int(0) } else { int(obs[t][a as usize - 1][i]) });
                arow.push(int(a as i64));
                total += rewards[t][a as usize - 1][i].clone();
            }
            obs_rows.push(orow);
            act_rows.push(arow);
            payoff.push(total);
        }
        let observed = DiscreteProcess::new(obs_rows).expect("rectangular");
        let id: String = format!(
            "s{}",
            combo.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("")
        );
        controls.push(Control {
            id,
            filtration: natural_filtration(&observed),
            measure: measure.clone(),
            payoff: RandomVariable::new(payoff),
        });
        action_processes.push(DiscreteProcess::new(act_rows).expect("rectangular"));
    }

    let times: Vec<ControlTime> = (0..=h)
        .map(|t| ControlTime::deterministic(format!("t{t}"), controls.len(), n, TimeValue::Finite(t)))
        .collect();
    let classes = derive_prefix_classes(&action_processes, &times).expect("dims agree");
    let system = FiniteControlSystem::new(SampleSpace::anonymous(n), h, controls, times, classes)
        .expect("shapes agree")
        .with_boundary_times();

    GeneratedSystem {
        system,
        vary_stage,
        free_atoms,
        choices: combos,
        rewards,
        shadow,
    }
}

/// Random strict coarsening of `field` (possibly trivial, never finer).
pub fn gen_sub_sigma_field(rng: &mut ChaCha8Rng, field: &SigmaField) -> SigmaField {
    let k = field.atom_count();
    let groups = rng.gen_range(1..=k);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); groups];
    for (a, atom) in field.atoms().iter().enumerate() {
        let g = if a < groups { a } else { rng.gen_range(0..groups) };
        blocks[g].extend(atom.iter().copied());
    }
    blocks.retain(|b| !b.is_empty());
    SigmaField::from_atoms(field.space_size(), blocks).expect("grouped atoms partition")
}

// ---------------------------------------------------------------------------
// Lattice / Bellman linkage campaign
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct LatticeBellmanConfig {
    pub systems: u64,
    pub max_outcomes: usize,
    pub max_horizon: usize,
    /// Random sub-σ-fields per system for the conditional esssup exchange.
    pub subfields_per_system: u32,
    pub seed: u64,
}

impl Default for LatticeBellmanConfig {
    fn default() -> Self {
        Self { systems: 200, max_outcomes: 6, max_horizon: 3, subfields_per_system: 3, seed: 11 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LatticeBellmanReport {
    pub systems: u64,
    /// Systems where some lattice condition failed although C1 is
    /// guaranteed by construction — must stay empty.
    pub lattice_failures: Vec<Violation>,
    /// C1 ⇒ C2 ⇒ C3 chain violations — engine bugs, must stay empty.
    pub chain_violations: Vec<Violation>,
    /// Supermartingale failures on lattice-satisfying systems — must stay
    /// empty.
    pub b1_failures: Vec<Violation>,
    /// Conditional esssup-exchange failures — must stay empty.
    pub exchange_failures: Vec<Violation>,
    pub exchange_checks: u64,
}

impl LatticeBellmanReport {
    pub fn passed(&self) -> bool {
        self.lattice_failures.is_empty()
            && self.chain_violations.is_empty()
            && self.b1_failures.is_empty()
            && self.exchange_failures.is_empty()
    }
}

/// Generates coherent systems and asserts the lattice conditions, the
/// implication chain, B1 and the conditional esssup exchange on every one.
pub fn run_lattice_bellman_campaign(cfg: &LatticeBellmanConfig) -> Result<LatticeBellmanReport> {
    let mut report = LatticeBellmanReport { systems: cfg.systems, ..Default::default() };
    for inst in 0..cfg.systems {
        let mut rng = substream(cfg.seed, inst);
        let shadow = rng.gen_bool(0.3);
        let generated =
            gen_coherent_system(&mut rng, cfg.max_outcomes, cfg.max_horizon, shadow);
        let sys = &generated.system;
        let val = validate(sys);
        if !val.passed() {
            report.lattice_failures.push(Violation {
                instance: inst,
                check: "generator-validation".into(),
                detail: format!("{:?}", val.failures().collect::<Vec<_>>()),
            });
            continue;
        }
        let bell = verify_bellman(sys)?;
        for l in &bell.lattice {
            if !l.c1.passed || !l.c2.passed || !l.c3.passed {
                report.lattice_failures.push(Violation {
                    instance: inst,
                    check: "lattice".into(),
                    detail: format!("({}, {})", l.control, l.time),
                });
            }
            if !l.chain_intact {
                report.chain_violations.push(Violation {
                    instance: inst,
                    check: "chain".into(),
                    detail: format!("({}, {})", l.control, l.time),
                });
            }
        }
        for b in &bell.b1 {
            if !b.passed {
                report.b1_failures.push(Violation {
                    instance: inst,
                    check: "b1".into(),
                    detail: b.witness.clone().unwrap_or_default(),
                });
            }
        }

        // Conditional esssup exchange over random sub-σ-fields.
        for _ in 0..cfg.subfields_per_system {
            let c = rng.gen_range(0..sys.controls.len());
            let t = rng.gen_range(0..sys.times.len());
            let field = sys.field_at(c, t)?;
            let a = gen_sub_sigma_field(&mut rng, &field);
            report.exchange_checks += 1;
            if !consistency_theorem_check(sys, c, t, &a)? {
                report.exchange_failures.push(Violation {
                    instance: inst,
                    check: "esssup-exchange".into(),
                    detail: format!("control {c}, time {t}"),
                });
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Snell-bridge campaign
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SnellConfig {
    pub instances: u64,
    pub max_outcomes: usize,
    pub max_horizon: usize,
    pub seed: u64,
}

impl Default for SnellConfig {
    fn default() -> Self {
        Self { instances: 100, max_outcomes: 5, max_horizon: 4, seed: 23 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SnellReport {
    pub instances: u64,
    pub failures: Vec<Violation>,
}

impl SnellReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random optimal-stopping systems: the Bellman value along the
/// never-yet-stopped control must equal the backward-induction envelope.
pub fn run_snell_campaign(cfg: &SnellConfig) -> Result<SnellReport> {
    let mut report = SnellReport { instances: cfg.instances, ..Default::default() };
    for inst in 0..cfg.instances {
        let mut rng = substream(cfg.seed, inst);
        let n = rng.gen_range(2..=cfg.max_outcomes);
        let h = rng.gen_range(1..=cfg.max_horizon);
        let x = gen_process(&mut rng, n, h, 4);
        // Time-zero value must be a.s. constant for the system to build.
        let start = int(rng.gen_range(0..4));
        let x = DiscreteProcess::new(
            (0..n)
                .map(|i| {
                    let mut row: Vec<Rational> =
                        (0..=h).map(|t| x.value(i, t).clone()).collect();
                    row[0] = start.clone();
                    row
                })
                .collect(),
        )
        .expect("rectangular");
        let with_null = rng.gen_bool(0.2);
        let p = gen_measure(&mut rng, n, with_null);
        let oss = build_optimal_stopping(&x, &p)?;
        if !snell_crosscheck(&oss, &x, &p)? {
            report.failures.push(Violation {
                instance: inst,
                check: "snell".into(),
                detail: describe_instance(&x, &oss.taus[oss.never_stop]),
            });
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Mutation campaign
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    /// One control is added to a foreign class, asymmetrically.
    EnlargeClass,
    /// Two singleton classes at the varying stage are merged.
    MergeClasses,
    /// The unique gluing witness of a cross-atom optimum is deleted.
    DeleteGlue,
}

impl std::fmt::Display for MutationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MutationKind::EnlargeClass => write!(f, "enlarge-class"),
            MutationKind::MergeClasses => write!(f, "merge-classes"),
            MutationKind::DeleteGlue => write!(f, "delete-glue"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MutationOutcome {
    pub instance: u64,
    pub kind: MutationKind,
    /// Which detector fired: "validate", "lattice" or "b1". `None` means the
    /// corruption went unnoticed — a campaign failure.
    pub caught_by: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct MutationReport {
    pub outcomes: Vec<MutationOutcome>,
}

impl MutationReport {
    pub fn all_caught(&self) -> bool {
        self.outcomes.iter().all(|o| o.caught_by.is_some())
    }
}

#[derive(Debug, Clone)]
pub struct MutationConfig {
    pub count: u64,
    pub max_outcomes: usize,
    pub max_horizon: usize,
    pub seed: u64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self { count: 50, max_outcomes: 6, max_horizon: 3, seed: 31 }
    }
}

fn detector(sys: &FiniteControlSystem) -> Result<Option<String>> {
    let val = validate(sys);
    if !val.passed() {
        return Ok(Some("validate".into()));
    }
    let zero = Rational::from_integer(0.into());
    for c in 0..sys.controls.len() {
        for t in 0..sys.times.len() {
            let l = lattice_check(sys, c, t, &zero, None)?;
            if !l.c1.passed || !l.c2.passed || !l.c3.passed {
                return Ok(Some("lattice".into()));
            }
        }
    }
    let bell = verify_bellman(sys)?;
    if bell.b1.iter().any(|c| !c.passed) {
        return Ok(Some("b1".into()));
    }
    Ok(None)
}

/// Two controls whose conditional payoffs at the last finite time cross
/// strictly on two positive-mass atoms of the conditioning field. Such a
/// pair's merged class cannot be upwards directed.
fn crossing_pair(sys: &FiniteControlSystem, time: usize) -> Result<Option<(usize, usize)>> {
    let k = sys.controls.len();
    for c in 0..k {
        for d in (c + 1)..k {
            let mu = &sys.controls[c].measure;
            if sys.class(time, c).contains(&d) {
                continue; // already together
            }
            let field_c = sys.field_at(c, time)?;
            if field_c != sys.field_at(d, time)? {
                continue; // merge would be caught by validate anyway
            }
            let jc = crate::control::conditional_payoff(sys, c, time)?;
            let jd = crate::control::conditional_payoff(sys, d, time)?;
            let mut c_wins = false;
            let mut d_wins = false;
            for i in 0..sys.outcome_count() {
                if mu.is_null(i) {
                    continue;
                }
                if jc.value(i) > jd.value(i) {
                    c_wins = true;
                }
                if jd.value(i) > jc.value(i) {
                    d_wins = true;
                }
            }
            if c_wins && d_wins {
                return Ok(Some((c, d)));
            }
        }
    }
    Ok(None)
}

/// Picks a control that is the unique pointwise optimum combination across
/// two free atoms, so that deleting it leaves the class without an upwards
/// bound. Returns (control index, conditioning time).
fn unique_glue_witness(
    sys: &FiniteControlSystem,
    gen: &GeneratedSystem,
) -> Result<Option<(usize, usize)>> {
    if gen.free_atoms.len() != 2 || sys.controls.len() != 4 {
        return Ok(None);
    }
    // Condition on the decision field: the deterministic time right before
    // the varying stage.
    let time = sys.time_index(&format!("t{}", gen.vary_stage - 1)).expect("time exists");
    let class = sys.class(time, 0).to_vec();
    if class.len() != 4 {
        return Ok(None);
    }
    let mu = &sys.controls[0].measure;
    let payoffs: Vec<RandomVariable> = class
        .iter()
        .map(|&d| crate::control::conditional_payoff(sys, d, time))
        .collect::<Result<_>>()?;
    let field = sys.field_at(0, time)?;
    // For each free atom, find the strict argmax among class members on a
    // positive-mass representative outcome.
    let mut best_choice: Vec<Option<u8>> = Vec::new();
    for (k, &atom_idx) in gen.free_atoms.iter().enumerate() {
        let atom = &field.atoms()[atom_idx];
        let Some(&rep) = atom.iter().find(|&&i| !mu.is_null(i)) else {
            return Ok(None);
        };
        let mut best: Option<(usize, &Rational)> = None;
        let mut strict = true;
        for (m, p) in payoffs.iter().enumerate() {
            match &best {
                None => best = Some((m, p.value(rep))),
                Some((bm, bv)) => {
                    if p.value(rep) > bv {
                        best = Some((m, p.value(rep)));
                        strict = true;
                    } else if p.value(rep) == *bv && gen.choices[m][k] != gen.choices[*bm][k] {
                        strict = false;
                    }
                }
            }
        }
        let (bm, _) = best.expect("class nonempty");
        if !strict {
            return Ok(None);
        }
        best_choice.push(Some(gen.choices[bm][k]));
    }
    // The unique member combining both best choices is the glue witness.
    let target: Vec<u8> = best_choice.into_iter().map(|c| c.unwrap()).collect();
    let witness = gen.choices.iter().position(|c| *c == target).expect("product family");
    // Deleting the witness only hurts if it is not duplicated by another
    // member equal a.s. (cannot happen: choices are distinct and argmaxes
    // strict), and the two best choices must not come from one control
    // being best everywhere.
    let others_differ = gen.choices.iter().enumerate().any(|(m, ch)| {
        m != witness && (ch[0] == target[0]) != (ch[1] == target[1])
    });
    if !others_differ {
        return Ok(None);
    }
    Ok(Some((class[witness], time)))
}

fn delete_control(sys: &FiniteControlSystem, victim: usize) -> FiniteControlSystem {
    let keep: Vec<usize> = (0..sys.controls.len()).filter(|&c| c != victim).collect();
    let remap = |old: usize| keep.iter().position(|&k| k == old).expect("kept");
    let controls: Vec<Control> = keep.iter().map(|&c| sys.controls[c].clone()).collect();
    let times: Vec<ControlTime> = sys
        .times
        .iter()
        .map(|t| ControlTime {
            id: t.id.clone(),
            stopping_times: keep.iter().map(|&c| t.stopping_times[c].clone()).collect(),
        })
        .collect();
    let classes: Vec<Vec<Vec<usize>>> = sys
        .classes
        .iter()
        .map(|row| {
            keep.iter()
                .map(|&c| {
                    row[c]
                        .iter()
                        .filter(|&&d| d != victim)
                        .map(|&d| remap(d))
                        .collect()
                })
                .collect()
        })
        .collect();
    FiniteControlSystem::new(sys.space.clone(), sys.horizon, controls, times, classes)
        .expect("shapes preserved")
}

/// Corrupts coherent systems and checks every corruption is detected.
pub fn run_mutation_campaign(cfg: &MutationConfig) -> Result<MutationReport> {
    let mut report = MutationReport::default();
    let kinds = [
        MutationKind::EnlargeClass,
        MutationKind::MergeClasses,
        MutationKind::DeleteGlue,
    ];
    let mut inst: u64 = 0;
    let mut draws: u64 = 0;
    while (report.outcomes.len() as u64) < cfg.count {
        let kind = kinds[(inst % 3) as usize];
        draws += 1;
        if draws > cfg.count * 200 {
            return Err(Error::Domain(
                "mutation campaign could not find enough material mutations".into(),
            ));
        }
        let mut rng = substream(cfg.seed, draws);
        let mutated: Option<FiniteControlSystem> = match kind {
            MutationKind::EnlargeClass => {
                let generated =
                    gen_coherent_system(&mut rng, cfg.max_outcomes, cfg.max_horizon, false);
                let sys = generated.system;
                // Find a time with a non-full class and extend it one-sidedly.
                let mut found = None;
                'search: for t in 0..sys.times.len() {
                    for c in 0..sys.controls.len() {
                        if sys.class(t, c).len() < sys.controls.len() {
                            let outsider = (0..sys.controls.len())
                                .find(|d| !sys.class(t, c).contains(d))
                                .expect("class not full");
                            found = Some((t, c, outsider));
                            break 'search;
                        }
                    }
                }
                found.map(|(t, c, outsider)| {
                    let mut sys = sys;
                    let mut class = sys.classes[t][c].clone();
                    class.push(outsider);
                    class.sort_unstable();
                    sys.classes[t][c] = class;
                    sys
                })
            }
            MutationKind::MergeClasses => {
                let generated =
                    gen_coherent_system(&mut rng, cfg.max_outcomes, cfg.max_horizon, true);
                let sys = generated.system;
                let time = sys
                    .time_index(&format!("t{}", sys.horizon))
                    .expect("terminal time exists");
                match crossing_pair(&sys, time)? {
                    None => None,
                    Some((c, d)) => {
                        let mut sys = sys;
                        let mut merged = sys.classes[time][c].clone();
                        merged.extend(sys.classes[time][d].iter().copied());
                        merged.sort_unstable();
                        merged.dedup();
                        for &m in &merged {
                            sys.classes[time][m] = merged.clone();
                        }
                        Some(sys)
                    }
                }
            }
            MutationKind::DeleteGlue => {
                let generated =
                    gen_coherent_system(&mut rng, cfg.max_outcomes, cfg.max_horizon, false);
                match unique_glue_witness(&generated.system, &generated)? {
                    None => None,
                    Some((victim, _)) => Some(delete_control(&generated.system, victim)),
                }
            }
        };
        let Some(mutated) = mutated else {
            continue; // redraw: no material corruption available here
        };
        let caught_by = detector(&mutated)?;
        report.outcomes.push(MutationOutcome { instance: inst, kind, caught_by });
        inst += 1;
    }
    Ok(report)
}
