//! Discrete-time processes, stopping times and informational consistency.
//!
//! Everything here runs on a finite horizon `{0..H}`; the value `∞` of a
//! random time is a sentinel meaning "at or beyond the horizon", and the
//! terminal σ-field `F_∞` is the stage-`H` field. All statements are then
//! decidable, and the classical discrete-time facts become checkable
//! operations:
//!
//! * a time is a stopping time of a process iff it is one of the stopped
//!   process ([`stopping_time_equivalence`]);
//! * the σ-field generated by the stopped process equals the natural
//!   filtration at the stopping time — the generalized Galmarino test
//!   ([`galmarino_check`]);
//! * two processes that agree when stopped generate the same information at
//!   the stopping time ([`observational_consistency`]);
//! * information is monotone along nested stopping times
//!   ([`information_monotone`]);
//! * the almost-sure versions of all of the above under measures with null
//!   outcomes ([`as_variants_check`]).
//!
//! [`sigma_at`] uses an atom-merge construction; its correctness is
//! cross-checked in tests against [`stopped_field_family`], the brute-force
//! enumeration of the defining condition.
//!
//! The separability and point-separation side conditions that burden the
//! continuous-time theory hold automatically here — every σ-field on a
//! finite space is generated by finitely many atoms — so nothing below
//! assumes them silently.

use std::collections::BTreeMap;
use std::fmt;

use crate::finite::{intersect, sigma_generated, Filtration, ProbMeasure, RandomVariable, SigmaField};
use crate::rational::Rational;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Times and processes
// ---------------------------------------------------------------------------

/// A time value in `{0..horizon} ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeValue {
    Finite(usize),
    Infinite,
}

impl TimeValue {
    pub fn min_with(self, t: usize) -> usize {
        match self {
            TimeValue::Finite(v) => v.min(t),
            TimeValue::Infinite => t,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, TimeValue::Infinite)
    }
}

impl fmt::Display for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeValue::Finite(v) => write!(f, "{v}"),
            TimeValue::Infinite => write!(f, "inf"),
        }
    }
}

/// A random time: one value per outcome. Whether it is a stopping time is a
/// property to check, never an assumption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomTime {
    values: Vec<TimeValue>,
}

impl RandomTime {
    pub fn new(values: Vec<TimeValue>) -> Self {
        Self { values }
    }

    pub fn constant(n: usize, v: TimeValue) -> Self {
        Self::new(vec![v; n])
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, i: usize) -> TimeValue {
        self.values[i]
    }

    pub fn values(&self) -> &[TimeValue] {
        &self.values
    }

    /// Pointwise `min(self, t)` — again a stopping time whenever `self` is.
    pub fn clip(&self, t: usize) -> RandomTime {
        RandomTime::new(
            self.values
                .iter()
                .map(|v| TimeValue::Finite(v.min_with(t)))
                .collect(),
        )
    }

    pub fn leq_pointwise(&self, other: &RandomTime) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// Equality on every outcome of positive weight.
    pub fn as_equal(&self, other: &RandomTime, mu: &ProbMeasure) -> bool {
        (0..self.size()).all(|i| mu.is_null(i) || self.values[i] == other.values[i])
    }

    /// The event `{self ≤ t}` as a sorted outcome list.
    pub fn le_event(&self, t: usize) -> Vec<usize> {
        (0..self.size())
            .filter(|&i| self.values[i] <= TimeValue::Finite(t))
            .collect()
    }

    /// True iff the time equals `v` on every positive-weight outcome.
    pub fn as_constant(&self, v: TimeValue, mu: &ProbMeasure) -> bool {
        (0..self.size()).all(|i| mu.is_null(i) || self.values[i] == v)
    }
}

/// A process on a finite space: `rows[outcome][time]`, times `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteProcess {
    rows: Vec<Vec<Rational>>,
}

impl DiscreteProcess {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Domain("process needs at least one outcome".into()));
        }
        let w = rows[0].len();
        if w == 0 {
            return Err(Error::Domain("process needs at least one time".into()));
        }
        if rows.iter().any(|r| r.len() != w) {
            return Err(Error::Domain("ragged process rows".into()));
        }
        Ok(Self { rows })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| crate::rational::int(v)).collect())
                .collect(),
        )
        .expect("integer literals form a rectangular process")
    }

    pub fn outcomes(&self) -> usize {
        self.rows.len()
    }

    pub fn horizon(&self) -> usize {
        self.rows[0].len() - 1
    }

    pub fn value(&self, outcome: usize, t: usize) -> &Rational {
        &self.rows[outcome][t]
    }

    pub fn column(&self, t: usize) -> RandomVariable {
        RandomVariable::new(self.rows.iter().map(|r| r[t].clone()).collect())
    }

    pub fn columns(&self) -> Vec<RandomVariable> {
        (0..=self.horizon()).map(|t| self.column(t)).collect()
    }

    /// Row equality restricted to positive-weight outcomes.
    pub fn as_equal(&self, other: &DiscreteProcess, mu: &ProbMeasure) -> bool {
        self.outcomes() == other.outcomes()
            && self.horizon() == other.horizon()
            && (0..self.outcomes()).all(|i| mu.is_null(i) || self.rows[i] == other.rows[i])
    }
}

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// Natural filtration `F^X_t = σ(X_0, …, X_t)`.
pub fn natural_filtration(x: &DiscreteProcess) -> Filtration {
    let n = x.outcomes();
    let mut stages = Vec::with_capacity(x.horizon() + 1);
    let mut current = sigma_generated(n, &[x.column(0)]).expect("columns match the space");
    stages.push(current.clone());
    for t in 1..=x.horizon() {
        current = crate::finite::refine(&current, &sigma_generated(n, &[x.column(t)]).unwrap())
            .expect("same space");
        stages.push(current.clone());
    }
    Filtration::new(stages).expect("joins are nondecreasing")
}

/// The stopped process `X^S`, frozen rowwise at `S(ω)`.
pub fn stop_process(x: &DiscreteProcess, s: &RandomTime) -> Result<DiscreteProcess> {
    if s.size() != x.outcomes() {
        return Err(Error::Dimension { expected: x.outcomes(), got: s.size() });
    }
    let rows = (0..x.outcomes())
        .map(|i| {
            (0..=x.horizon())
                .map(|t| x.value(i, s.value(i).min_with(t)).clone())
                .collect()
        })
        .collect();
    DiscreteProcess::new(rows)
}

/// True iff every event `{S ≤ t}` is a union of atoms of `f.stage(t)`.
pub fn is_stopping_time(s: &RandomTime, f: &Filtration) -> Result<bool> {
    if s.size() != f.space_size() {
        return Err(Error::Dimension { expected: f.space_size(), got: s.size() });
    }
    Ok((0..=f.horizon()).all(|t| f.stage(t).contains_set(&s.le_event(t))))
}

/// The filtration at a stopping time:
/// `G_S = {A ∈ G_∞ : A ∩ {S ≤ t} ∈ G_t for all t}`.
///
/// Computed by merging outcomes that no admissible `A` can separate: two
/// outcomes share an atom of `G_S` iff they carry the same time value and lie
/// in the same atom of the stage at that value. The brute-force enumeration
/// of the defining condition ([`stopped_field_family`]) is the test oracle
/// for this construction.
pub fn sigma_at(f: &Filtration, s: &RandomTime) -> Result<SigmaField> {
    if !is_stopping_time(s, f)? {
        return Err(Error::Precondition(
            "sigma_at needs a stopping time of the filtration".into(),
        ));
    }
    let h = f.horizon();
    let mut classes: BTreeMap<(TimeValue, usize), Vec<usize>> = BTreeMap::new();
    for i in 0..f.space_size() {
        let v = s.value(i);
        let stage_atom = f.stage(v.min_with(h)).atom_index(i);
        classes.entry((v, stage_atom)).or_default().push(i);
    }
    SigmaField::from_atoms(f.space_size(), classes.into_values().collect())
}

/// Every subset `A` of outcomes with `A ∈ G_∞` and `A ∩ {S ≤ t} ∈ G_t` for
/// all `t`, by direct enumeration over unions of terminal atoms.
///
/// For a stopping time this family is exactly the σ-field [`sigma_at`]; for
/// an arbitrary random time it need not even be closed under complement,
/// which is what the dropped-hypothesis campaigns go looking for.
pub fn stopped_field_family(f: &Filtration, s: &RandomTime) -> Result<Vec<Vec<usize>>> {
    if s.size() != f.space_size() {
        return Err(Error::Dimension { expected: f.space_size(), got: s.size() });
    }
    let terminal = f.terminal();
    let k = terminal.atom_count();
    if k > 20 {
        return Err(Error::Domain(format!(
            "brute-force enumeration over 2^{k} atom unions refused"
        )));
    }
    let le_events: Vec<Vec<usize>> = (0..=f.horizon()).map(|t| s.le_event(t)).collect();
    let mut family = Vec::new();
    for mask in 0u32..(1u32 << k) {
        let set: Vec<usize> = (0..k)
            .filter(|&a| mask & (1 << a) != 0)
            .flat_map(|a| terminal.atoms()[a].iter().copied())
            .collect();
        let mut sorted = set.clone();
        sorted.sort_unstable();
        let admissible = (0..=f.horizon()).all(|t| {
            let inter: Vec<usize> = sorted
                .iter()
                .copied()
                .filter(|i| le_events[t].contains(i))
                .collect();
            f.stage(t).contains_set(&inter)
        });
        if admissible {
            family.push(sorted);
        }
    }
    Ok(family)
}

/// The membership family of a σ-field (all measurable sets), for comparison
/// against [`stopped_field_family`].
pub fn field_sets(g: &SigmaField) -> Vec<Vec<usize>> {
    let k = g.atom_count();
    assert!(k <= 20, "set enumeration over 2^{k} atoms refused");
    let mut out = Vec::with_capacity(1 << k);
    for mask in 0u32..(1u32 << k) {
        let mut set: Vec<usize> = (0..k)
            .filter(|&a| mask & (1 << a) != 0)
            .flat_map(|a| g.atoms()[a].iter().copied())
            .collect();
        set.sort_unstable();
        out.push(set);
    }
    out.sort();
    out
}

/// `σ(X^S)`: the σ-field generated by the coordinates of the stopped
/// process. Defined for arbitrary random times, stopping or not.
pub fn sigma_generated_of_stopped(x: &DiscreteProcess, s: &RandomTime) -> Result<SigmaField> {
    let stopped = stop_process(x, s)?;
    sigma_generated(x.outcomes(), &stopped.columns())
}

/// Checks the discrete-time equivalence "S is a stopping time of `F^X` iff it
/// is one of `F^{X^S}`": returns both verdicts, which must always agree.
pub fn stopping_time_equivalence(x: &DiscreteProcess, s: &RandomTime) -> Result<(bool, bool)> {
    let a = is_stopping_time(s, &natural_filtration(x))?;
    let b = is_stopping_time(s, &natural_filtration(&stop_process(x, s)?))?;
    Ok((a, b))
}

/// Outcome of [`galmarino_check`].
#[derive(Debug, Clone)]
pub struct GalmarinoReport {
    /// `σ(X^S) = F^X_S` — the discrete-time identity.
    pub fields_equal: bool,
    /// The measurable-set characterisation: `A ∈ F^X_S` ⇔ `1_A` constant on
    /// every set where `X^S` is constant and `A ∈ F^X_∞` ⇔ `A ∈ σ(X^S)`.
    pub characterization_equal: bool,
    pub sigma_of_stopped: SigmaField,
    pub field_at_stop: SigmaField,
}

impl GalmarinoReport {
    pub fn holds(&self) -> bool {
        self.fields_equal && self.characterization_equal
    }
}

/// The generalized Galmarino test in discrete time.
pub fn galmarino_check(x: &DiscreteProcess, s: &RandomTime) -> Result<GalmarinoReport> {
    let f = natural_filtration(x);
    if !is_stopping_time(s, &f)? {
        return Err(Error::Precondition(
            "galmarino_check needs a stopping time of the natural filtration".into(),
        ));
    }
    let stopped = stop_process(x, s)?;
    let sigma_of_stopped = sigma_generated(x.outcomes(), &stopped.columns())?;
    let field_at_stop = sigma_at(&f, s)?;
    let fields_equal = sigma_of_stopped == field_at_stop;

    // Sets whose indicator is constant wherever X^S is constant *and* which
    // are terminally measurable: exactly the σ-field σ(X^S) ∩ F^X_∞.
    let characterization = intersect(&sigma_of_stopped, f.terminal())?;
    let characterization_equal = characterization == sigma_of_stopped && fields_equal;

    Ok(GalmarinoReport { fields_equal, characterization_equal, sigma_of_stopped, field_at_stop })
}

/// Observational consistency: if `X^S = Y^S` and `S` is a stopping time of at
/// least one of the natural filtrations, then `F^X_S = F^Y_S`.
///
/// Recomputes both sides; `false` is a bug-detection signal rather than a
/// legitimate outcome.
pub fn observational_consistency(
    x: &DiscreteProcess,
    y: &DiscreteProcess,
    s: &RandomTime,
) -> Result<bool> {
    if stop_process(x, s)? != stop_process(y, s)? {
        return Err(Error::Precondition(
            "observational consistency needs X^S = Y^S pointwise".into(),
        ));
    }
    let fx = natural_filtration(x);
    let fy = natural_filtration(y);
    let sx = is_stopping_time(s, &fx)?;
    let sy = is_stopping_time(s, &fy)?;
    if !sx && !sy {
        return Err(Error::Precondition(
            "S must be a stopping time of at least one natural filtration".into(),
        ));
    }
    // In discrete time, being a stopping time of one filtration forces the
    // other (the stopped processes coincide); a mismatch is a bug signal.
    if !(sx && sy) {
        return Ok(false);
    }
    Ok(sigma_at(&fx, s)? == sigma_at(&fy, s)?)
}

/// Monotonicity of information: `U ≤ V` stopping times of `F^Z` imply
/// `σ(Z^U) ⊆ σ(Z^V)`.
pub fn information_monotone(
    z: &DiscreteProcess,
    u: &RandomTime,
    v: &RandomTime,
) -> Result<bool> {
    if !u.leq_pointwise(v) {
        return Err(Error::Precondition("information_monotone needs U ≤ V pointwise".into()));
    }
    let f = natural_filtration(z);
    if !is_stopping_time(u, &f)? || !is_stopping_time(v, &f)? {
        return Err(Error::Precondition(
            "information_monotone needs both times to be stopping times of F^Z".into(),
        ));
    }
    let su = sigma_generated(z.outcomes(), &stop_process(z, u)?.columns())?;
    let sv = sigma_generated(z.outcomes(), &stop_process(z, v)?.columns())?;
    sv.refines(&su)
}

/// Rebuilds from `s` a genuine stopping time of `f` that agrees with `s` on
/// every positive-weight outcome, or reports that none exists.
///
/// For each time value `v`, the event `{s = v}` is matched almost surely by a
/// union of stage-`v` atoms; overlaps on null outcomes are resolved towards
/// the earliest time and leftovers become `∞`.
pub fn as_stopping_time_version(
    s: &RandomTime,
    f: &Filtration,
    mu: &ProbMeasure,
) -> Result<RandomTime> {
    let n = f.space_size();
    if s.size() != n || mu.size() != n {
        return Err(Error::Dimension { expected: n, got: s.size().max(mu.size()) });
    }
    let h = f.horizon();
    let mut assigned = vec![TimeValue::Infinite; n];
    let mut taken = vec![false; n];
    let mut order: Vec<TimeValue> = (0..=h).map(TimeValue::Finite).collect();
    order.push(TimeValue::Infinite);
    for v in order {
        let stage = f.stage(v.min_with(h));
        // Atoms holding a positive-weight outcome with s = v.
        for atom in stage.atoms() {
            let hit = atom.iter().any(|&i| !mu.is_null(i) && s.value(i) == v);
            if !hit {
                continue;
            }
            for &i in atom {
                if !mu.is_null(i) && s.value(i) != v {
                    return Err(Error::Precondition(format!(
                        "time is not a.s. equal to any stopping time: outcome {i} splits a stage atom"
                    )));
                }
                if !taken[i] {
                    assigned[i] = v;
                    taken[i] = true;
                }
            }
        }
    }
    let rebuilt = RandomTime::new(assigned);
    debug_assert!(is_stopping_time(&rebuilt, f)?);
    debug_assert!(rebuilt.as_equal(s, mu));
    Ok(rebuilt)
}

/// Almost-sure variant of observational consistency under a measure with
/// null outcomes: with `X^S = Y^S` a.s. and `s` a.s. equal to a stopping time
/// of each natural filtration, the completions of `F^X_S`, `σ(X^S)`,
/// `σ(Y^S)` and `F^Y_S` all coincide.
pub fn as_variants_check(
    mu: &ProbMeasure,
    x: &DiscreteProcess,
    y: &DiscreteProcess,
    s: &RandomTime,
) -> Result<bool> {
    if !stop_process(x, s)?.as_equal(&stop_process(y, s)?, mu) {
        return Err(Error::Precondition(
            "as_variants_check needs X^S = Y^S on all positive-weight outcomes".into(),
        ));
    }
    let fx = natural_filtration(x);
    let fy = natural_filtration(y);
    let sx = as_stopping_time_version(s, &fx, mu)?;
    let sy = as_stopping_time_version(s, &fy, mu)?;

    let fields = [
        sigma_at(&fx, &sx)?,
        sigma_generated(x.outcomes(), &stop_process(x, &sx)?.columns())?,
        sigma_generated(y.outcomes(), &stop_process(y, &sy)?.columns())?,
        sigma_at(&fy, &sy)?,
    ];
    let completed: Vec<SigmaField> =
        fields.iter().map(|g| g.completion(mu)).collect::<Result<_>>()?;
    Ok(completed.iter().all(|g| *g == completed[0]))
}

/// Trace identity at the end of time: if a finite family of stopping times
/// reaches the horizon on `A` (pointwise max ≥ horizon there), the terminal
/// σ-field traced on `A` equals the join of the `F_{S_k}` traced on `A`.
pub fn end_of_time_trace_holds(
    f: &Filtration,
    times: &[RandomTime],
    a: &[usize],
) -> Result<bool> {
    for i in a {
        let reaches = times
            .iter()
            .any(|s| s.value(*i) >= TimeValue::Finite(f.horizon()));
        if !reaches {
            return Err(Error::Precondition(format!(
                "times do not access the horizon on outcome {i}"
            )));
        }
    }
    let lhs = f.terminal().trace(a);
    // Join of the traced partitions: refine them pairwise on A.
    let mut atom_keys: Vec<Vec<usize>> = vec![Vec::new(); f.space_size()];
    for s in times {
        let g = sigma_at(f, s)?;
        for &i in a {
            atom_keys[i].push(g.atom_index(i));
        }
    }
    let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for &i in a {
        classes.entry(atom_keys[i].clone()).or_default().push(i);
    }
    let mut rhs: Vec<Vec<usize>> = classes.into_values().collect();
    rhs.sort_by_key(|b| b[0]);
    Ok(lhs == rhs)
}

/// First entrance time of the process into the set described by `hit`.
pub fn first_entrance_time(
    x: &DiscreteProcess,
    hit: impl Fn(&Rational) -> bool,
) -> RandomTime {
    RandomTime::new(
        (0..x.outcomes())
            .map(|i| {
                (0..=x.horizon())
                    .find(|&t| hit(x.value(i, t)))
                    .map_or(TimeValue::Infinite, TimeValue::Finite)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn tv(t: usize) -> TimeValue {
        TimeValue::Finite(t)
    }

    /// The two-box observed process for the optimal control: X_0 = 0,
    /// X_1 = Y1, X_2 = Y2 on {Y1=0} and Y1 on {Y1=1}.
    fn box_observed_optimal() -> DiscreteProcess {
        DiscreteProcess::from_ints(&[
            &[0, 0, -1], // (0,-1)
            &[0, 0, 1],  // (0,1)
            &[0, 1, 1],  // (1,-1)
            &[0, 1, 1],  // (1,1)
        ])
    }

    #[test]
    fn natural_filtration_shapes() {
        // Constant process: every stage trivial.
        let c = DiscreteProcess::from_ints(&[&[1, 1], &[1, 1], &[1, 1]]);
        let f = natural_filtration(&c);
        assert!(f.stage(0).is_trivial() && f.stage(1).is_trivial());

        // Injective at time 0: discrete from the start.
        let inj = DiscreteProcess::from_ints(&[&[1, 0], &[2, 0], &[3, 0]]);
        let f = natural_filtration(&inj);
        assert!(f.stage(0).is_discrete() && f.stage(1).is_discrete());

        // Box observed process: trivial, then σ(Y1), then σ(Y1, final obs).
        let f = natural_filtration(&box_observed_optimal());
        assert!(f.stage(0).is_trivial());
        assert_eq!(f.stage(1).atoms(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(f.stage(2).atoms(), &[vec![0], vec![1], vec![2, 3]]);
    }

    #[test]
    fn stop_process_basics() {
        let x = DiscreteProcess::from_ints(&[&[0, 1, 2]]);
        let never = RandomTime::constant(1, TimeValue::Infinite);
        assert_eq!(stop_process(&x, &never).unwrap(), x);
        let at0 = RandomTime::constant(1, tv(0));
        assert_eq!(stop_process(&x, &at0).unwrap(), DiscreteProcess::from_ints(&[&[0, 0, 0]]));
        let at1 = RandomTime::constant(1, tv(1));
        assert_eq!(stop_process(&x, &at1).unwrap(), DiscreteProcess::from_ints(&[&[0, 1, 1]]));
    }

    #[test]
    fn stop_process_idempotent() {
        let x = box_observed_optimal();
        let s = RandomTime::new(vec![tv(1), tv(2), tv(1), TimeValue::Infinite]);
        let once = stop_process(&x, &s).unwrap();
        let twice = stop_process(&once, &s).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn stopping_time_detection() {
        let x = box_observed_optimal();
        let f = natural_filtration(&x);
        // Deterministic times always stop.
        for t in 0..=2 {
            assert!(is_stopping_time(&RandomTime::constant(4, tv(t)), &f).unwrap());
        }
        // First entrance into {value = 1}.
        let fe = first_entrance_time(&x, |v| *v == int(1));
        assert_eq!(fe.values(), &[TimeValue::Infinite, tv(2), tv(1), tv(1)]);
        assert!(is_stopping_time(&fe, &f).unwrap());
        // A time anticipating the time-2 value at time 1 is not a stopping
        // time: outcomes 0 and 1 share the stage-1 atom but get split.
        let anticipating = RandomTime::new(vec![tv(1), tv(2), tv(1), tv(1)]);
        assert!(!is_stopping_time(&anticipating, &f).unwrap());
    }

    #[test]
    fn sigma_at_deterministic_and_box() {
        let x = box_observed_optimal();
        let f = natural_filtration(&x);
        let h = f.horizon();
        assert_eq!(sigma_at(&f, &RandomTime::constant(4, tv(h))).unwrap(), *f.stage(h));
        assert_eq!(sigma_at(&f, &RandomTime::constant(4, tv(0))).unwrap(), *f.stage(0));
        let g1 = sigma_at(&f, &RandomTime::constant(4, tv(1))).unwrap();
        assert_eq!(g1.atoms(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn sigma_at_matches_brute_force() {
        // The merge construction against the enumeration of the definition.
        let x = box_observed_optimal();
        let f = natural_filtration(&x);
        let fe = first_entrance_time(&x, |v| *v == int(1));
        for s in [
            fe,
            RandomTime::constant(4, tv(0)),
            RandomTime::constant(4, tv(1)),
            RandomTime::new(vec![tv(1), tv(1), tv(2), tv(2)]),
        ] {
            if !is_stopping_time(&s, &f).unwrap() {
                continue;
            }
            let fast = sigma_at(&f, &s).unwrap();
            let mut family = stopped_field_family(&f, &s).unwrap();
            family.sort();
            assert_eq!(family, field_sets(&fast), "time {:?}", s);
        }
    }

    #[test]
    fn sigma_at_requires_stopping_time() {
        let x = box_observed_optimal();
        let f = natural_filtration(&x);
        let bad = RandomTime::new(vec![tv(1), tv(2), tv(1), tv(1)]);
        assert!(matches!(sigma_at(&f, &bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn equivalence_pair_agrees() {
        let x = box_observed_optimal();
        // Deterministic, first-entrance, and anticipating times.
        let cases = vec![
            RandomTime::constant(4, tv(1)),
            first_entrance_time(&x, |v| *v == int(1)),
            RandomTime::new(vec![tv(1), tv(2), tv(1), tv(1)]),
            RandomTime::new(vec![tv(2), tv(0), tv(1), TimeValue::Infinite]),
        ];
        for s in cases {
            let (a, b) = stopping_time_equivalence(&x, &s).unwrap();
            assert_eq!(a, b, "equivalence must hold for {s:?}");
        }
    }

    #[test]
    fn galmarino_box_cases() {
        let x = box_observed_optimal();
        // s ≡ 0: both σ-fields are σ(X_0) = trivial.
        let r = galmarino_check(&x, &RandomTime::constant(4, tv(0))).unwrap();
        assert!(r.holds());
        assert!(r.sigma_of_stopped.is_trivial());
        // s ≡ 1: both equal σ(Y1).
        let r = galmarino_check(&x, &RandomTime::constant(4, tv(1))).unwrap();
        assert!(r.holds());
        assert_eq!(r.sigma_of_stopped.atoms(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn observational_consistency_box() {
        // Two observed processes agreeing through time 1, stopped at 1.
        let x = box_observed_optimal();
        let y = DiscreteProcess::from_ints(&[
            &[0, 0, 0],
            &[0, 0, 0],
            &[0, 1, -1],
            &[0, 1, 1],
        ]);
        let s = RandomTime::constant(4, tv(1));
        assert!(observational_consistency(&x, &y, &s).unwrap());
        assert!(observational_consistency(&x, &x, &s).unwrap());
        // Differing stopped processes are a precondition error.
        let z = DiscreteProcess::from_ints(&[&[1, 0, 0], &[0, 0, 0], &[0, 1, 0], &[0, 1, 1]]);
        assert!(matches!(
            observational_consistency(&x, &z, &s),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn information_monotone_cases() {
        let x = box_observed_optimal();
        let u = RandomTime::constant(4, tv(0));
        let v = RandomTime::constant(4, tv(2));
        assert!(information_monotone(&x, &u, &v).unwrap());
        assert!(information_monotone(&x, &u, &u).unwrap());
        let fe = first_entrance_time(&x, |w| *w == int(1));
        let clipped = fe.clip(1);
        assert!(information_monotone(&x, &clipped, &RandomTime::constant(4, tv(2))).unwrap());
        assert!(matches!(
            information_monotone(&x, &v, &u),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn as_variants_reduces_to_exact_without_nulls() {
        let x = box_observed_optimal();
        let mu = ProbMeasure::new(vec![rat(1, 6), rat(1, 3), rat(1, 3), rat(1, 6)]).unwrap();
        let s = RandomTime::constant(4, tv(1));
        assert!(as_variants_check(&mu, &x, &x, &s).unwrap());
    }

    #[test]
    fn as_variants_null_insensitive() {
        // Outcome 3 is null; x and y differ only there, and s is perturbed
        // there away from the deterministic time 1.
        let mu = ProbMeasure::new(vec![rat(1, 2), rat(1, 4), rat(1, 4), rat(0, 1)]).unwrap();
        let x = DiscreteProcess::from_ints(&[&[0, 1, 1], &[0, 2, 2], &[0, 2, 3], &[0, 5, 6]]);
        let y = DiscreteProcess::from_ints(&[&[0, 1, 1], &[0, 2, 2], &[0, 2, 3], &[0, 7, 8]]);
        let s = RandomTime::new(vec![tv(1), tv(1), tv(1), tv(2)]);
        assert!(as_variants_check(&mu, &x, &y, &s).unwrap());
    }

    #[test]
    fn end_of_time_trace() {
        let x = box_observed_optimal();
        let f = natural_filtration(&x);
        let fe = first_entrance_time(&x, |v| *v == int(1)); // (inf, 2, 1, 1)
        let t2 = RandomTime::constant(4, tv(2));
        // fe alone reaches the horizon on outcomes {1} (value 2) and {0}
        // (inf ≥ horizon); with t2 added, everywhere.
        let a: Vec<usize> = vec![0, 1, 2, 3];
        assert!(end_of_time_trace_holds(&f, &[fe.clone(), t2], &a).unwrap());
        // On the sub-event {0, 1} the single family {fe} already accesses
        // the horizon pointwise.
        assert!(end_of_time_trace_holds(&f, &[fe], &[0, 1]).unwrap());
    }

    #[test]
    fn first_entrance_against_threshold() {
        let x = DiscreteProcess::new(vec![
            vec![int(0), rat(1, 2), int(2)],
            vec![int(0), int(-1), int(-2)],
        ])
        .unwrap();
        let fe = first_entrance_time(&x, |v| *v >= int(1));
        assert_eq!(fe.values(), &[tv(2), TimeValue::Infinite]);
    }
}
