//! The inequality catalog: directional checks between A-functionals,
//! evaluated with certified enclosures.
//!
//! Every entry compares a left-hand and a right-hand side. The slack is
//! always computed from the enclosure ends that make a pass sound, so a
//! certified pass can never be produced by optimization error. Entries
//! involving `±` are evaluated for both signs.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::functionals::{a_numerical_radius, crawford, op_seminorm};
use crate::linalg::{c64, spectral_norm, ComplexMatrix, ComplexVector};
use crate::range::RadiusOptions;
use crate::space::{Layout, SemiHilbertSpace, SemiOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `lhs <= rhs`
    Le,
    /// `lhs >= rhs`
    Ge,
    /// `lhs = rhs`
    Eq,
    /// Reported only; never a gate.
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    PassCertified,
    PassUncertified,
    ViolationCandidate,
    Diagnostic,
}

impl Verdict {
    fn severity(self) -> u8 {
        match self {
            Verdict::Diagnostic => 0,
            Verdict::PassCertified => 1,
            Verdict::PassUncertified => 2,
            Verdict::ViolationCandidate => 3,
        }
    }
}

/// A catalog entry.
#[derive(Clone, Debug, Serialize)]
pub struct CheckDefinition {
    pub id: &'static str,
    pub title: &'static str,
    /// The relation in plain notation; `n` is the A-seminorm, `w` the
    /// A-numerical radius, `c` the A-Crawford number, `#` the A-adjoint.
    pub statement: &'static str,
    /// Operand names; each must lie in `B_A(H)`.
    pub operands: &'static [&'static str],
    pub direction: Direction,
    /// Whether the entry is evaluated for both signs of `±`.
    pub signed: bool,
}

macro_rules! entry {
    ($id:literal, $title:literal, $stmt:literal, [$($op:literal),*], $dir:ident, $signed:literal) => {
        CheckDefinition {
            id: $id,
            title: $title,
            statement: $stmt,
            operands: &[$($op),*],
            direction: Direction::$dir,
            signed: $signed,
        }
    };
}

static CATALOG: [CheckDefinition; 23] = [
    entry!("C1", "seminorm sandwich", "n(T)/2 <= w(T) <= n(T)", ["T"], Le, false),
    entry!("C2", "selfadjoint radius", "n(H) = w(H) for A-selfadjoint H", ["H"], Eq, false),
    entry!("C3", "adjoint products", "n(T#T) = n(TT#) = n(T)^2 = n(T#)^2", ["T"], Eq, false),
    entry!("C4", "radius via T#T + TT#", "n(T#T+TT#)/4 <= w(T)^2 <= n(T#T+TT#)/2", ["T"], Le, false),
    entry!("C5", "commutator bound", "w(TS±ST) <= 2√2 min{n(T)w(S), n(S)w(T)}", ["T", "S"], Le, true),
    entry!(
        "C6",
        "generalized commutator bound",
        "w(T1S1±S2T2) <= √n(T1T1#+T2#T2) √n(S1#S1+S2S2#)",
        ["T1", "T2", "S1", "S2"],
        Le,
        true
    ),
    entry!(
        "C7",
        "block identities",
        "w(diag(T,S)) = max{w(T),w(S)}; w(antidiag(T,T)) = w(T); n(diag(T,S)) = n(antidiag(T,S)) = max{n(T),n(S)}",
        ["T", "S"],
        Eq,
        false
    ),
    entry!(
        "C8",
        "two-operator commutator bound",
        "w(T1S±ST2) <= 4 w(antidiag(T1,T2)) w(S)",
        ["T1", "T2", "S"],
        Le,
        true
    ),
    entry!("C9", "radius commutator bound", "w(TS±ST) <= 4 w(T) w(S)", ["T", "S"], Le, true),
    entry!("C10", "commuting product", "w(UV) <= 2 w(U) w(V) when UV = VU", ["U", "V"], Le, false),
    entry!("C11", "mixed norm bound", "n(TT#+S#S) <= max{n(T)^2,n(S)^2} + n(ST)", ["T", "S"], Le, false),
    entry!(
        "C12",
        "antidiagonal lower bound",
        "w(antidiag(X,Y)) >= √(n(X#X+YY#) + 2c(YX))/2",
        ["X", "Y"],
        Ge,
        false
    ),
    entry!(
        "C13",
        "refined commutator chain",
        "w(TX±YS) <= 2√(max{n(T)^2,n(S)^2}+n(ST)) √(w(antidiag(X,Y))^2 - c(YX)/2) <= 2√2 max{n(T),n(S)} w(antidiag(X,Y))",
        ["T", "S", "X", "Y"],
        Le,
        true
    ),
    entry!(
        "C14",
        "seminorm chain",
        "n(ST) <= n(T)n(S) <= (n(T)^2+n(S)^2)/2 <= max{n(T)^2,n(S)^2}",
        ["T", "S"],
        Le,
        false
    ),
    entry!(
        "C15",
        "pointwise bound under w <= 1",
        "w(T) <= 1, n(x) = 1 => n(Tx)^2 + n(T#x)^2 <= 4(1 - |n(Re T)^2 - n(Im T)^2|/2)",
        ["T"],
        Le,
        false
    ),
    entry!(
        "C16",
        "T#T + TT# via real and imaginary parts",
        "n(T#T+TT#) <= 4 max{n(Re T)^2, n(Im T)^2} - 2|n(Re T)^2 - n(Im T)^2|",
        ["T"],
        Le,
        false
    ),
    entry!(
        "C17",
        "sum and difference bound",
        "n(X#X+Y#Y) <= max{n(X+Y)^2, n(X-Y)^2} - |n(X+Y)^2 - n(X-Y)^2|/2",
        ["X", "Y"],
        Le,
        false
    ),
    entry!(
        "C18",
        "T#T + TT# via the radius",
        "n(T#T+TT#) <= 4 w(T)^2 - 2|n(Re T)^2 - n(Im T)^2|",
        ["T"],
        Le,
        false
    ),
    entry!("C19", "parts do not exceed the radius", "w(Re T) <= w(T), w(Im T) <= w(T)", ["T"], Le, false),
    entry!(
        "C20",
        "three-factor commutator bound",
        "w(TXS±SYT) <= 2√2 n(S) max{n(X),n(Y)} √(w(T)^2 - |n(Re T)^2 - n(Im T)^2|/2)",
        ["T", "X", "S", "Y"],
        Le,
        true
    ),
    entry!(
        "C21",
        "refined commutator bound",
        "w(TS±ST) <= 2√2 min{f(T,S), f(S,T)}, f(X,Y) = n(Y) √(w(X)^2 - |n(Re X)^2 - n(Im X)^2|/2)",
        ["T", "S"],
        Le,
        true
    ),
    entry!(
        "C22",
        "square bound",
        "w(T^2) <= √2 n(T) √(w(T)^2 - |n(Re T)^2 - n(Im T)^2|/2)",
        ["T"],
        Le,
        false
    ),
    entry!(
        "C23",
        "near-equality diagnostic",
        "C5 tight and n(S) > 0 => report whether n(Re T) = n(Im T)",
        ["T", "S"],
        Conditional,
        false
    ),
];

/// All catalog entries, ordered by id.
pub fn catalog() -> &'static [CheckDefinition] {
    &CATALOG
}

pub fn definition(id: &str) -> Result<&'static CheckDefinition> {
    CATALOG
        .iter()
        .find(|d| d.id.eq_ignore_ascii_case(id))
        .ok_or_else(|| Error::UnknownCheck(id.to_string()))
}

/// Parses `all`, single ids, ranges such as `C1..C5` and comma lists.
pub fn parse_check_ids(spec: &str) -> Result<Vec<&'static str>> {
    let mut picked = [false; 23];
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part.eq_ignore_ascii_case("all") {
            picked = [true; 23];
            continue;
        }
        let index = |id: &str| -> Result<usize> {
            let def = definition(id)?;
            Ok(CATALOG.iter().position(|d| d.id == def.id).unwrap_or(0))
        };
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (index(a.trim())?, index(b.trim())?);
                if a > b {
                    return Err(Error::BadConfig(format!("empty check range `{part}`")));
                }
                picked[a..=b].iter_mut().for_each(|p| *p = true);
            }
            None => picked[index(part)?] = true,
        }
    }
    let ids: Vec<_> = CATALOG.iter().zip(picked).filter(|(_, p)| *p).map(|(d, _)| d.id).collect();
    if ids.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(ids)
}

/// Tolerances for verdicts and preconditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckOptions {
    pub radius: RadiusOptions,
    /// Relative rounding floor under which a negative slack still certifies.
    pub cert_floor: f64,
    pub violation_tol: f64,
    pub equality_tol: f64,
    /// Relative bound on `||UV - VU||_2` for commuting pairs.
    pub commute_tol: f64,
    /// Accepted deviation of `n(x)` from 1 for supplied unit vectors.
    pub unit_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            radius: RadiusOptions::default(),
            cert_floor: 1e-10,
            violation_tol: 1e-7,
            equality_tol: 1e-6,
            commute_tol: 1e-8,
            unit_tol: 1e-8,
        }
    }
}

/// Operands for a catalog run: named `n x n` operators and A-unit vectors.
#[derive(Clone, Debug, Default)]
pub struct OperandBundle {
    pub operators: BTreeMap<String, ComplexMatrix>,
    pub vectors: Vec<ComplexVector>,
}

impl OperandBundle {
    pub fn with(mut self, name: &str, m: ComplexMatrix) -> Self {
        self.operators.insert(name.to_string(), m);
        self
    }
}

/// One evaluated relation of an entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub label: String,
    pub direction: Direction,
    pub lhs: Enclosure,
    pub rhs: Enclosure,
    pub slack: f64,
    pub tightness: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub instance: Option<String>,
    /// Sides of the relation with the smallest slack.
    pub lhs: Enclosure,
    pub rhs: Enclosure,
    pub slack: f64,
    pub tightness: f64,
    /// Worst verdict over all relations.
    pub verdict: Verdict,
    pub relations: Vec<Relation>,
    pub note: Option<String>,
}

impl CheckResult {
    pub fn relation(&self, label: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.label == label)
    }
}

/// Result of one entry within a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: &'static str,
    pub result: Result<CheckResult>,
}

/// `slack` uses the unfavourable ends of the enclosures, `best` the
/// favourable ones. Only a relation violated at both ends is a candidate.
fn classify(slack: f64, best: f64, scale: f64, opts: &CheckOptions) -> Verdict {
    let unit = 1.0 + scale.abs();
    if slack >= -opts.cert_floor * unit {
        Verdict::PassCertified
    } else if best < -opts.violation_tol * unit {
        Verdict::ViolationCandidate
    } else {
        Verdict::PassUncertified
    }
}

fn ratio(small: f64, large: f64) -> f64 {
    small / large.max(f64::MIN_POSITIVE)
}

fn relation(label: impl Into<String>, direction: Direction, lhs: Enclosure, rhs: Enclosure, opts: &CheckOptions) -> Relation {
    let (slack, best, tightness, scale) = match direction {
        Direction::Le | Direction::Conditional => (rhs.lo - lhs.hi, rhs.hi - lhs.lo, ratio(lhs.hi, rhs.lo), rhs.hi),
        Direction::Ge => (lhs.lo - rhs.hi, lhs.hi - rhs.lo, ratio(rhs.hi, lhs.lo), rhs.hi),
        Direction::Eq => {
            let overlap = (rhs.hi - lhs.lo).min(lhs.hi - rhs.lo);
            (overlap, overlap, ratio(lhs.hi, rhs.lo), lhs.hi.abs().max(rhs.hi.abs()))
        }
    };
    let verdict = match direction {
        Direction::Conditional => Verdict::Diagnostic,
        _ => classify(slack, best, scale, opts),
    };
    Relation {
        label: label.into(),
        direction,
        lhs,
        rhs,
        slack,
        tightness,
        verdict,
    }
}

fn summarize(id: &str, relations: Vec<Relation>, note: Option<String>) -> CheckResult {
    let worst = relations
        .iter()
        .min_by(|a, b| a.slack.total_cmp(&b.slack))
        .expect("every entry evaluates at least one relation");
    let verdict = relations
        .iter()
        .map(|r| r.verdict)
        .max_by_key(|v| v.severity())
        .unwrap_or(Verdict::PassCertified);
    let tightness = relations.iter().map(|r| r.tightness).fold(0.0, f64::max);
    CheckResult {
        id: id.to_string(),
        instance: None,
        lhs: worst.lhs,
        rhs: worst.rhs,
        slack: worst.slack,
        tightness,
        verdict,
        relations,
        note,
    }
}

struct Entry {
    op: SemiOperator,
    doubled: bool,
}

/// Evaluates catalog entries on one operand bundle, caching every derived
/// operator and enclosure by expression key.
pub struct Evaluator<'s> {
    space: &'s SemiHilbertSpace,
    doubled: Option<SemiHilbertSpace>,
    opts: CheckOptions,
    entries: HashMap<String, Entry>,
    vectors: Vec<ComplexVector>,
    norms: HashMap<String, Enclosure>,
    radii: HashMap<String, Enclosure>,
    crawfords: HashMap<String, Enclosure>,
}

const SIGNS: [(f64, &str); 2] = [(1.0, "+"), (-1.0, "-")];

impl<'s> Evaluator<'s> {
    pub fn new(space: &'s SemiHilbertSpace, bundle: &OperandBundle, opts: &CheckOptions) -> Result<Self> {
        let mut entries = HashMap::new();
        for (name, m) in &bundle.operators {
            entries.insert(
                name.clone(),
                Entry {
                    op: space.register(m.clone())?,
                    doubled: false,
                },
            );
        }
        for x in &bundle.vectors {
            if x.len() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: format!("vector of length {}", space.dim()),
                    found: format!("length {}", x.len()),
                });
            }
        }
        Ok(Self {
            space,
            doubled: None,
            opts: *opts,
            entries,
            vectors: bundle.vectors.clone(),
            norms: HashMap::new(),
            radii: HashMap::new(),
            crawfords: HashMap::new(),
        })
    }

    pub fn options(&self) -> &CheckOptions {
        &self.opts
    }

    fn require(&self, name: &str) -> Result<()> {
        let entry = self
            .entries
            .get(name)
            .ok_or_else(|| Error::PreconditionFailed(format!("operand `{name}` not supplied")))?;
        let op = &entry.op;
        if op.admits_adjoint() != op.is_a_bounded() {
            return Err(Error::MembershipViolated {
                operand: name.to_string(),
                reason: "the A-adjoint and A-boundedness tests disagree".into(),
            });
        }
        if !op.admits_adjoint() {
            return Err(Error::MembershipViolated {
                operand: name.to_string(),
                reason: "R(T*A) is not contained in R(A)".into(),
            });
        }
        Ok(())
    }

    fn m(&self, key: &str) -> &ComplexMatrix {
        self.entries[key].op.matrix()
    }

    /// Registers a derived operator on the base space. Products, sums and
    /// A-adjoints of admissible operators are admissible, so the cached
    /// facts are inherited rather than re-tested.
    fn define(&mut self, key: &str, build: impl FnOnce(&Self) -> ComplexMatrix) -> String {
        if !self.entries.contains_key(key) {
            let m = build(self);
            let op = self.space.register_admissible(m);
            self.entries.insert(key.to_string(), Entry { op, doubled: false });
        }
        key.to_string()
    }

    fn sharp(&mut self, key: &str) -> Result<String> {
        let name = format!("{key}#");
        if !self.entries.contains_key(&name) {
            let s = self.space.sharp(&self.entries[key].op)?;
            self.define(&name, |_| s);
        }
        Ok(name)
    }

    fn re(&mut self, key: &str) -> Result<String> {
        let name = format!("Re({key})");
        if !self.entries.contains_key(&name) {
            let m = self.space.re_part(&self.entries[key].op)?;
            self.define(&name, |_| m);
        }
        Ok(name)
    }

    fn im(&mut self, key: &str) -> Result<String> {
        let name = format!("Im({key})");
        if !self.entries.contains_key(&name) {
            let m = self.space.im_part(&self.entries[key].op)?;
            self.define(&name, |_| m);
        }
        Ok(name)
    }

    fn block(&mut self, t: &str, s: &str, layout: Layout) -> Result<String> {
        let name = match layout {
            Layout::Diagonal => format!("diag({t},{s})"),
            Layout::Antidiagonal => format!("antidiag({t},{s})"),
        };
        if !self.entries.contains_key(&name) {
            if self.doubled.is_none() {
                self.doubled = Some(self.space.double());
            }
            let doubled = self.doubled.as_ref().expect("just built");
            let op = doubled.block2(&self.entries[t].op, &self.entries[s].op, layout)?;
            self.entries.insert(name.clone(), Entry { op, doubled: true });
        }
        Ok(name)
    }

    fn space_of(&self, entry: &Entry) -> &SemiHilbertSpace {
        if entry.doubled {
            self.doubled.as_ref().expect("doubled space exists for doubled entries")
        } else {
            self.space
        }
    }

    /// The A-seminorm of a registered expression.
    pub fn n(&mut self, key: &str) -> Result<Enclosure> {
        if let Some(e) = self.norms.get(key) {
            return Ok(*e);
        }
        let entry = &self.entries[key];
        let e = op_seminorm(self.space_of(entry), &entry.op)?;
        self.norms.insert(key.to_string(), e);
        Ok(e)
    }

    /// The A-numerical radius of a registered expression.
    pub fn w(&mut self, key: &str) -> Result<Enclosure> {
        if let Some(e) = self.radii.get(key) {
            return Ok(*e);
        }
        let entry = &self.entries[key];
        let e = a_numerical_radius(self.space_of(entry), &entry.op, &self.opts.radius)?;
        self.radii.insert(key.to_string(), e);
        Ok(e)
    }

    /// The A-Crawford number of a registered expression.
    pub fn c(&mut self, key: &str) -> Result<Enclosure> {
        if let Some(e) = self.crawfords.get(key) {
            return Ok(*e);
        }
        let entry = &self.entries[key];
        let e = crawford(self.space_of(entry), &entry.op, &self.opts.radius)?;
        self.crawfords.insert(key.to_string(), e);
        Ok(e)
    }

    /// `|n(Re T)^2 - n(Im T)^2|`.
    fn part_defect(&mut self, t: &str) -> Result<Enclosure> {
        let re = self.re(t)?;
        let im = self.im(t)?;
        Ok(self.n(&re)?.square().sub(self.n(&im)?.square()).abs())
    }

    /// `T#T + TT#`.
    fn adjoint_sum(&mut self, t: &str) -> Result<String> {
        let ts = self.sharp(t)?;
        Ok(self.define(&format!("{t}#{t}+{t}{t}#"), |e| {
            e.m(&ts) * e.m(t) + e.m(t) * e.m(&ts)
        }))
    }

    fn rel(&self, label: impl Into<String>, direction: Direction, lhs: Enclosure, rhs: Enclosure) -> Relation {
        relation(label, direction, lhs, rhs, &self.opts)
    }

    /// Evaluates one catalog entry.
    pub fn run(&mut self, id: &str) -> Result<CheckResult> {
        let def = definition(id)?;
        for name in def.operands {
            self.require(name)?;
        }
        let mut note = None;
        let relations = match def.id {
            "C1" => self.c1()?,
            "C2" => self.c2()?,
            "C3" => self.c3()?,
            "C4" => self.c4()?,
            "C5" => self.c5()?,
            "C6" => self.c6()?,
            "C7" => self.c7()?,
            "C8" => self.c8()?,
            "C9" => self.c9()?,
            "C10" => self.c10()?,
            "C11" => self.c11()?,
            "C12" => self.c12()?,
            "C13" => self.c13()?,
            "C14" => self.c14()?,
            "C15" => self.c15()?,
            "C16" => self.c16()?,
            "C17" => self.c17()?,
            "C18" => self.c18()?,
            "C19" => self.c19()?,
            "C20" => self.c20()?,
            "C21" => self.c21()?,
            "C22" => self.c22()?,
            "C23" => {
                let (rels, text) = self.c23()?;
                note = Some(text);
                rels
            }
            other => return Err(Error::UnknownCheck(other.to_string())),
        };
        Ok(summarize(def.id, relations, note))
    }

    fn c1(&mut self) -> Result<Vec<Relation>> {
        let n = self.n("T")?;
        let w = self.w("T")?;
        Ok(vec![
            self.rel("n/2 <= w", Direction::Le, n.scale(0.5), w),
            self.rel("w <= n", Direction::Le, w, n),
        ])
    }

    fn c2(&mut self) -> Result<Vec<Relation>> {
        if !self.space.is_a_selfadjoint(self.m("H")) {
            return Err(Error::PreconditionFailed("H is not A-selfadjoint".into()));
        }
        let n = self.n("H")?;
        let w = self.w("H")?;
        Ok(vec![self.rel("n = w", Direction::Eq, n, w)])
    }

    fn c3(&mut self) -> Result<Vec<Relation>> {
        let ts = self.sharp("T")?;
        let sharp_t = self.define("T#T", |e| e.m(&ts) * e.m("T"));
        let t_sharp = self.define("TT#", |e| e.m("T") * e.m(&ts));
        let n2 = self.n("T")?.square();
        let a = self.n(&sharp_t)?;
        let b = self.n(&t_sharp)?;
        let c = self.n(&ts)?.square();
        Ok(vec![
            self.rel("n(T#T) = n(T)^2", Direction::Eq, a, n2),
            self.rel("n(TT#) = n(T)^2", Direction::Eq, b, n2),
            self.rel("n(T#)^2 = n(T)^2", Direction::Eq, c, n2),
        ])
    }

    fn c4(&mut self) -> Result<Vec<Relation>> {
        let q = self.adjoint_sum("T")?;
        let nq = self.n(&q)?;
        let w2 = self.w("T")?.square();
        Ok(vec![
            self.rel("lower", Direction::Le, nq.scale(0.25), w2),
            self.rel("upper", Direction::Le, w2, nq.scale(0.5)),
        ])
    }

    fn commutator(&mut self, sign: f64, label: &str) -> String {
        self.define(&format!("TS{label}ST"), |e| {
            e.m("T") * e.m("S") + e.m("S") * e.m("T") * c64(sign, 0.0)
        })
    }

    fn c5_rhs(&mut self) -> Result<Enclosure> {
        let a = self.n("T")?.mul(self.w("S")?);
        let b = self.n("S")?.mul(self.w("T")?);
        Ok(a.min(b).scale(2.0 * std::f64::consts::SQRT_2))
    }

    fn c5(&mut self) -> Result<Vec<Relation>> {
        let rhs = self.c5_rhs()?;
        let mut out = Vec::new();
        for (sign, label) in SIGNS {
            let k = self.commutator(sign, label);
            let lhs = self.w(&k)?;
            out.push(self.rel(label, Direction::Le, lhs, rhs));
        }
        Ok(out)
    }

    fn c6(&mut self) -> Result<Vec<Relation>> {
        let t1s = self.sharp("T1")?;
        let t2s = self.sharp("T2")?;
        let s1s = self.sharp("S1")?;
        let s2s = self.sharp("S2")?;
        let p = self.define("T1T1#+T2#T2", |e| e.m("T1") * e.m(&t1s) + e.m(&t2s) * e.m("T2"));
        let q = self.define("S1#S1+S2S2#", |e| e.m(&s1s) * e.m("S1") + e.m("S2") * e.m(&s2s));
        let rhs = self.n(&p)?.sqrt().mul(self.n(&q)?.sqrt());
        let mut out = Vec::new();
        for (sign, label) in SIGNS {
            let k = self.define(&format!("T1S1{label}S2T2"), |e| {
                e.m("T1") * e.m("S1") + e.m("S2") * e.m("T2") * c64(sign, 0.0)
            });
            let lhs = self.w(&k)?;
            out.push(self.rel(label, Direction::Le, lhs, rhs));
        }
        Ok(out)
    }

    fn c7(&mut self) -> Result<Vec<Relation>> {
        let diag = self.block("T", "S", Layout::Diagonal)?;
        let anti_tt = self.block("T", "T", Layout::Antidiagonal)?;
        let anti_ts = self.block("T", "S", Layout::Antidiagonal)?;
        let wt = self.w("T")?;
        let ws = self.w("S")?;
        let nmax = self.n("T")?.max(self.n("S")?);
        let w_diag = self.w(&diag)?;
        let w_anti = self.w(&anti_tt)?;
        let n_diag = self.n(&diag)?;
        let n_anti = self.n(&anti_ts)?;
        Ok(vec![
            self.rel("(i) w(diag(T,S))", Direction::Eq, w_diag, wt.max(ws)),
            self.rel("(ii) w(antidiag(T,T))", Direction::Eq, w_anti, wt),
            self.rel("(iii) n(diag(T,S))", Direction::Eq, n_diag, nmax),
            self.rel("(iii) n(antidiag(T,S))", Direction::Eq, n_anti, nmax),
        ])
    }

    fn c8(&mut self) -> Result<Vec<Relation>> {
        let anti = self.block("T1", "T2", Layout::Antidiagonal)?;
        let rhs = self.w(&anti)?.mul(self.w("S")?).scale(4.0);
        let mut out = Vec::new();
        for (sign, label) in SIGNS {
            let k = self.define(&format!("T1S{label}ST2"), |e| {
                e.m("T1") * e.m("S") + e.m("S") * e.m("T2") * c64(sign, 0.0)
            });
            let lhs = self.w(&k)?;
            out.push(self.rel(label, Direction::Le, lhs, rhs));
        }
        Ok(out)
    }

    fn c9(&mut self) -> Result<Vec<Relation>> {
        let rhs = self.w("T")?.mul(self.w("S")?).scale(4.0);
        let mut out = Vec::new();
        for (sign, label) in SIGNS {
            let k = self.commutator(sign, label);
            let lhs = self.w(&k)?;
            out.push(self.rel(label, Direction::Le, lhs, rhs));
        }
        Ok(out)
    }

    fn c10(&mut self) -> Result<Vec<Relation>> {
        let (u, v) = (self.m("U"), self.m("V"));
        let defect = spectral_norm(&(u * v - v * u));
        let allowed = self.opts.commute_tol * (1.0 + spectral_norm(u) * spectral_norm(v));
        if defect > allowed {
            return Err(Error::PreconditionFailed(format!(
                "U and V do not commute: ||UV - VU|| = {defect:e} exceeds {allowed:e}"
            )));
        }
        let uv = self.define("UV", |e| e.m("U") * e.m("V"));
        let lhs = self.w(&uv)?;
        let rhs = self.w("U")?.mul(self.w("V")?).scale(2.0);
        Ok(vec![self.rel("w(UV) <= 2w(U)w(V)", Direction::Le, lhs, rhs)])
    }

    fn max_sq_plus_st(&mut self) -> Result<Enclosure> {
        let st = self.define("ST", |e| e.m("S") * e.m("T"));
        let n_st = self.n(&st)?;
        Ok(self.n("T")?.square().max(self.n("S")?.square()).add(n_st))
    }

    fn c11(&mut self) -> Result<Vec<Relation>> {
        let ts = self.sharp("T")?;
        let ss = self.sharp("S")?;
        let k = self.define("TT#+S#S", |e| e.m("T") * e.m(&ts) + e.m(&ss) * e.m("S"));
        let lhs = self.n(&k)?;
        let rhs = self.max_sq_plus_st()?;
        Ok(vec![self.rel("n(TT#+S#S) <= bound", Direction::Le, lhs, rhs)])
    }

    fn c12(&mut self) -> Result<Vec<Relation>> {
        let anti = self.block("X", "Y", Layout::Antidiagonal)?;
        let xs = self.sharp("X")?;
        let ys = self.sharp("Y")?;
        let k = self.define("X#X+YY#", |e| e.m(&xs) * e.m("X") + e.m("Y") * e.m(&ys));
        let yx = self.define("YX", |e| e.m("Y") * e.m("X"));
        let lhs = self.w(&anti)?;
        let rhs = self.n(&k)?.add(self.c(&yx)?.scale(2.0)).sqrt().scale(0.5);
        Ok(vec![self.rel("w(antidiag(X,Y)) >= bound", Direction::Ge, lhs, rhs)])
    }

    /// Middle and outer bounds of the refined commutator chain.
    pub fn c13_bounds(&mut self) -> Result<(Enclosure, Enclosure)> {
        for name in ["T", "S", "X", "Y"] {
            self.require(name)?;
        }
        let anti = self.block("X", "Y", Layout::Antidiagonal)?;
        let yx = self.define("YX", |e| e.m("Y") * e.m("X"));
        let w_anti = self.w(&anti)?;
        let inner = w_anti.square().sub(self.c(&yx)?.scale(0.5));
        let mid = self.max_sq_plus_st()?.sqrt().mul(inner.sqrt()).scale(2.0);
        let outer = self
            .n("T")?
            .max(self.n("S")?)
            .mul(w_anti)
            .scale(2.0 * std::f64::consts::SQRT_2);
        Ok((mid, outer))
    }

    fn c13(&mut self) -> Result<Vec<Relation>> {
        let (mid, outer) = self.c13_bounds()?;
        let mut out = Vec::new();
        for (sign, label) in SIGNS {
            let k = self.define(&format!("TX{label}YS"), |e| {
                e.m("T") * e.m("X") + e.m("Y") * e.m("S") * c64(sign, 0.0)
            });
            let lhs = self.w(&k)?;
            out.push(self.rel(label, Direction::Le, lhs, mid));
        }
        out.push(self.rel("middle <= outer", Direction::Le, mid, outer));
        Ok(out)
    }

    fn c14(&mut self) -> Result<Vec<Relation>> {
        let st = self.define("ST", |e| e.m("S") * e.m("T"));
        let (nt, ns) = (self.n("T")?, self.n("S")?);
        let prod = nt.mul(ns);
        let mean = nt.square().add(ns.square()).scale(0.5);
        let max = nt.square().max(ns.square());
        let n_st = self.n(&st)?;
        Ok(vec![
            self.rel("n(ST) <= n(T)n(S)", Direction::Le, n_st, prod),
            self.rel("n(T)n(S) <= mean", Direction::Le, prod, mean),
            self.rel("mean <= max", Direction::Le, mean, max),
        ])
    }

    fn c15(&mut self) -> Result<Vec<Relation>> {
        if self.vectors.is_empty() {
            return Err(Error::PreconditionFailed("no unit vectors supplied".into()));
        }
        let w = self.w("T")?;
        if w.lo <= 1e-12 {
            return Err(Error::PreconditionFailed("w(T) is too small to normalize".into()));
        }
        let scale = 1.0 / w.hi;
        let t = self.define("T/w(T)", |e| e.m("T") * c64(scale, 0.0));
        let ts = self.sharp(&t)?;
        let rhs = Enclosure::exact(4.0).sub(self.part_defect(&t)?.scale(2.0));
        let mut out = Vec::new();
        for (k, x) in self.vectors.iter().enumerate() {
            let nx = self.space.a_vec_norm(x)?;
            if (nx - 1.0).abs() > self.opts.unit_tol {
                return Err(Error::PreconditionFailed(format!("vector {k} has A-seminorm {nx}")));
            }
            let a = self.space.a_vec_norm(&(self.m(&t) * x))?;
            let b = self.space.a_vec_norm(&(self.m(&ts) * x))?;
            let lhs = Enclosure::exact(a * a + b * b);
            out.push(relation(format!("x{k}"), Direction::Le, lhs, rhs, &self.opts));
        }
        Ok(out)
    }

    fn c16(&mut self) -> Result<Vec<Relation>> {
        let q = self.adjoint_sum("T")?;
        let lhs = self.n(&q)?;
        let re = self.re("T")?;
        let im = self.im("T")?;
        let top = self.n(&re)?.square().max(self.n(&im)?.square()).scale(4.0);
        let rhs = top.sub(self.part_defect("T")?.scale(2.0));
        Ok(vec![self.rel("n(T#T+TT#) <= bound", Direction::Le, lhs, rhs)])
    }

    fn c17(&mut self) -> Result<Vec<Relation>> {
        let xs = self.sharp("X")?;
        let ys = self.sharp("Y")?;
        let k = self.define("X#X+Y#Y", |e| e.m(&xs) * e.m("X") + e.m(&ys) * e.m("Y"));
        let sum = self.define("X+Y", |e| e.m("X") + e.m("Y"));
        let diff = self.define("X-Y", |e| e.m("X") - e.m("Y"));
        let lhs = self.n(&k)?;
        let p = self.n(&sum)?.square();
        let q = self.n(&diff)?.square();
        let rhs = p.max(q).sub(p.sub(q).abs().scale(0.5));
        Ok(vec![self.rel("n(X#X+Y#Y) <= bound", Direction::Le, lhs, rhs)])
    }

    fn c18(&mut self) -> Result<Vec<Relation>> {
        let q = self.adjoint_sum("T")?;
        let lhs = self.n(&q)?;
        let rhs = self.w("T")?.square().scale(4.0).sub(self.part_defect("T")?.scale(2.0));
        Ok(vec![self.rel("n(T#T+TT#) <= bound", Direction::Le, lhs, rhs)])
    }

    fn c19(&mut self) -> Result<Vec<Relation>> {
        let re = self.re("T")?;
        let im = self.im("T")?;
        let w = self.w("T")?;
        let wr = self.w(&re)?;
        let wi = self.w(&im)?;
        Ok(vec![
            self.rel("w(Re T) <= w(T)", Direction::Le, wr, w),
            self.rel("w(Im T) <= w(T)", Direction::Le, wi, w),
        ])
    }

    /// `sqrt(w(T)^2 - |n(Re T)^2 - n(Im T)^2| / 2)`.
    fn reduced_radius(&mut self, t: &str) -> Result<Enclosure> {
        let defect = self.part_defect(t)?;
        Ok(self.w(t)?.square().sub(defect.scale(0.5)).sqrt())
    }

    fn c20(&mut self) -> Result<Vec<Relation>> {
        let factor = self.n("X")?.max(self.n("Y")?);
        let rhs = self
            .n("S")?
            .mul(factor)
            .mul(self.reduced_radius("T")?)
            .scale(2.0 * std::f64::consts::SQRT_2);
        let mut out = Vec::new();
        for (sign, label) in SIGNS {
            let k = self.define(&format!("TXS{label}SYT"), |e| {
                e.m("T") * e.m("X") * e.m("S") + e.m("S") * e.m("Y") * e.m("T") * c64(sign, 0.0)
            });
            let lhs = self.w(&k)?;
            out.push(self.rel(label, Direction::Le, lhs, rhs));
        }
        Ok(out)
    }

    /// Right-hand side of the refined commutator bound.
    pub fn c21_rhs(&mut self) -> Result<Enclosure> {
        self.require("T")?;
        self.require("S")?;
        let f_ts = self.n("S")?.mul(self.reduced_radius("T")?);
        let f_st = self.n("T")?.mul(self.reduced_radius("S")?);
        Ok(f_ts.min(f_st).scale(2.0 * std::f64::consts::SQRT_2))
    }

    /// Right-hand side of the commutator bound.
    pub fn c5_bound(&mut self) -> Result<Enclosure> {
        self.require("T")?;
        self.require("S")?;
        self.c5_rhs()
    }

    fn c21(&mut self) -> Result<Vec<Relation>> {
        let rhs = self.c21_rhs()?;
        let mut out = Vec::new();
        for (sign, label) in SIGNS {
            let k = self.commutator(sign, label);
            let lhs = self.w(&k)?;
            out.push(self.rel(label, Direction::Le, lhs, rhs));
        }
        Ok(out)
    }

    fn c22(&mut self) -> Result<Vec<Relation>> {
        let sq = self.define("T^2", |e| e.m("T") * e.m("T"));
        let lhs = self.w(&sq)?;
        let rhs = self.n("T")?.mul(self.reduced_radius("T")?).scale(std::f64::consts::SQRT_2);
        Ok(vec![self.rel("w(T^2) <= bound", Direction::Le, lhs, rhs)])
    }

    fn c23(&mut self) -> Result<(Vec<Relation>, String)> {
        let ns = self.n("S")?;
        if ns.hi <= 0.0 {
            return Err(Error::PreconditionFailed("n(S) = 0".into()));
        }
        let slack = self
            .c5()?
            .iter()
            .map(|r| r.slack)
            .fold(f64::INFINITY, f64::min);
        if slack >= self.opts.equality_tol {
            return Err(Error::PreconditionFailed(format!(
                "the commutator bound is not tight (slack {slack:e})"
            )));
        }
        let defect = self.part_defect("T")?;
        let tol = Enclosure::exact(self.opts.equality_tol);
        let holds = defect.hi < self.opts.equality_tol;
        let text = if holds {
            format!("n(Re T) = n(Im T) within {:e}", self.opts.equality_tol)
        } else {
            format!("n(Re T) and n(Im T) differ: defect {defect}")
        };
        Ok((vec![self.rel("defect < equality_tol", Direction::Conditional, defect, tol)], text))
    }
}

/// Evaluates a single entry.
pub fn run_check(space: &SemiHilbertSpace, id: &str, bundle: &OperandBundle, opts: &CheckOptions) -> Result<CheckResult> {
    let def = definition(id)?;
    Evaluator::new(space, bundle, opts)?.run(def.id)
}

/// Evaluates the selected entries on one bundle, sharing all intermediate
/// results. Errors are reported per entry.
pub fn run_selected(space: &SemiHilbertSpace, ids: &[&str], bundle: &OperandBundle, opts: &CheckOptions) -> Result<Vec<Outcome>> {
    let defs = ids.iter().map(|id| definition(id)).collect::<Result<Vec<_>>>()?;
    let mut eval = Evaluator::new(space, bundle, opts)?;
    Ok(defs
        .into_iter()
        .map(|d| Outcome {
            id: d.id,
            result: eval.run(d.id),
        })
        .collect())
}

/// Evaluates every entry in id order.
pub fn run_all(space: &SemiHilbertSpace, bundle: &OperandBundle, opts: &CheckOptions) -> Result<Vec<Outcome>> {
    let ids: Vec<&str> = CATALOG.iter().map(|d| d.id).collect();
    run_selected(space, &ids, bundle, opts)
}

/// Slack statistics for one entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessSummary {
    pub id: String,
    pub count: usize,
    pub min_slack: f64,
    pub median_slack: f64,
    pub max_tightness: f64,
    pub argmin_instance: Option<String>,
    pub argmin_relation: String,
}

/// Per-entry slack statistics, in catalog order.
pub fn tightness_report(results: &[CheckResult]) -> Result<Vec<TightnessSummary>> {
    if results.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut grouped: BTreeMap<usize, Vec<&CheckResult>> = BTreeMap::new();
    for r in results {
        let order = CATALOG.iter().position(|d| d.id == r.id).unwrap_or(usize::MAX);
        grouped.entry(order).or_default().push(r);
    }
    Ok(grouped
        .into_values()
        .map(|group| {
            let argmin = group
                .iter()
                .copied()
                .reduce(|best, r| if r.slack < best.slack { r } else { best })
                .expect("groups are nonempty");
            let mut slacks: Vec<f64> = group.iter().map(|r| r.slack).collect();
            slacks.sort_by(f64::total_cmp);
            let mid = slacks.len() / 2;
            let median = if slacks.len() % 2 == 1 {
                slacks[mid]
            } else {
                0.5 * (slacks[mid - 1] + slacks[mid])
            };
            let worst_relation = argmin
                .relations
                .iter()
                .min_by(|a, b| a.slack.total_cmp(&b.slack))
                .map(|r| r.label.clone())
                .unwrap_or_default();
            TightnessSummary {
                id: argmin.id.clone(),
                count: group.len(),
                min_slack: argmin.slack,
                median_slack: median,
                max_tightness: group.iter().map(|r| r.tightness).fold(0.0, f64::max),
                argmin_instance: argmin.instance.clone(),
                argmin_relation: worst_relation,
            }
        })
        .collect())
}
