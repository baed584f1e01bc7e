//! Finite semantics: birelational models (worlds with an intuitionistic
//! order `leq` and an accessibility relation `acc`), Kripke predicate
//! structures (per-world domains, predicates and relations), satisfaction,
//! class checks, interpretations of labelled sequents into models, and
//! brute-force enumeration of small models for testing.

use crate::formula::{Formula, Label};
use crate::rules::RuleInstance;
use crate::sequent::{DisjFormula, Sequent};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A finite birelational model.  Worlds are indices into `worlds`; `leq` is
/// the intuitionistic order, `acc` the modal accessibility relation, `val`
/// the (monotone) valuation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "BirelJson", try_from = "BirelJson")]
pub struct BirelModel {
    pub worlds: Vec<String>,
    pub leq: BTreeSet<(usize, usize)>,
    pub acc: BTreeSet<(usize, usize)>,
    pub val: Vec<BTreeSet<String>>,
}

impl BirelModel {
    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn leq_holds(&self, w: usize, v: usize) -> bool {
        self.leq.contains(&(w, v))
    }

    pub fn acc_holds(&self, w: usize, v: usize) -> bool {
        self.acc.contains(&(w, v))
    }

    /// Structural invariants: `leq` a partial order, frame conditions F1 and
    /// F2, and monotonicity of the valuation.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.worlds.len();
        if self.val.len() != n {
            return Err("valuation must cover every world".to_owned());
        }
        for &(a, b) in self.leq.iter().chain(self.acc.iter()) {
            if a >= n || b >= n {
                return Err(format!("relation mentions unknown world index {}", a.max(b)));
            }
        }
        for w in 0..n {
            if !self.leq_holds(w, w) {
                return Err(format!("leq is not reflexive at {}", self.worlds[w]));
            }
        }
        for &(a, b) in &self.leq {
            if a != b && self.leq_holds(b, a) {
                return Err(format!(
                    "leq is not antisymmetric on {} and {}",
                    self.worlds[a], self.worlds[b]
                ));
            }
            for &(b2, c) in &self.leq {
                if b2 == b && !self.leq_holds(a, c) {
                    return Err(format!(
                        "leq is not transitive at {} <= {} <= {}",
                        self.worlds[a], self.worlds[b], self.worlds[c]
                    ));
                }
            }
            if a != b && !self.val[a].is_subset(&self.val[b]) {
                return Err(format!(
                    "valuation is not monotone from {} to {}",
                    self.worlds[a], self.worlds[b]
                ));
            }
        }
        // F1: w <= w' and w R v  =>  exists v' >= v with w' R v'
        for &(w, w1) in &self.leq {
            for &(w2, v) in &self.acc {
                if w2 != w {
                    continue;
                }
                let ok = (0..n).any(|v1| self.leq_holds(v, v1) && self.acc_holds(w1, v1));
                if !ok {
                    return Err(format!(
                        "F1 fails: {} <= {} and {} R {}",
                        self.worlds[w], self.worlds[w1], self.worlds[w], self.worlds[v]
                    ));
                }
            }
        }
        // F2: w R v and v <= v'  =>  exists w' >= w with w' R v'
        for &(w, v) in &self.acc {
            for &(v2, v1) in &self.leq {
                if v2 != v {
                    continue;
                }
                let ok = (0..n).any(|w1| self.leq_holds(w, w1) && self.acc_holds(w1, v1));
                if !ok {
                    return Err(format!(
                        "F2 fails: {} R {} and {} <= {}",
                        self.worlds[w], self.worlds[v], self.worlds[v], self.worlds[v1]
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Intuitionistic (birelational) satisfaction: implication quantifies over
/// `leq`-successors, box over `leq` then `acc`, diamond existentially over
/// `acc` alone.
pub fn birel_satisfies(m: &BirelModel, w: usize, f: &Formula) -> bool {
    match f {
        Formula::Atom(p) => m.val[w].contains(p),
        Formula::Bottom => false,
        Formula::And(a, b) => birel_satisfies(m, w, a) && birel_satisfies(m, w, b),
        Formula::Or(a, b) => birel_satisfies(m, w, a) || birel_satisfies(m, w, b),
        Formula::Imp(a, b) => (0..m.worlds.len()).all(|w1| {
            !m.leq_holds(w, w1) || !birel_satisfies(m, w1, a) || birel_satisfies(m, w1, b)
        }),
        Formula::Box(a) => (0..m.worlds.len()).all(|w1| {
            !m.leq_holds(w, w1)
                || (0..m.worlds.len()).all(|v| !m.acc_holds(w1, v) || birel_satisfies(m, v, a))
        }),
        Formula::Dia(a) => (0..m.worlds.len())
            .any(|v| m.acc_holds(w, v) && birel_satisfies(m, v, a)),
    }
}

/// Classical satisfaction over the same carrier: `leq` is ignored (treated
/// as the identity), so implication is material and box quantifies over
/// `acc` only.
pub fn classical_satisfies(m: &BirelModel, w: usize, f: &Formula) -> bool {
    match f {
        Formula::Atom(p) => m.val[w].contains(p),
        Formula::Bottom => false,
        Formula::And(a, b) => classical_satisfies(m, w, a) && classical_satisfies(m, w, b),
        Formula::Or(a, b) => classical_satisfies(m, w, a) || classical_satisfies(m, w, b),
        Formula::Imp(a, b) => !classical_satisfies(m, w, a) || classical_satisfies(m, w, b),
        Formula::Box(a) => (0..m.worlds.len())
            .all(|v| !m.acc_holds(w, v) || classical_satisfies(m, v, a)),
        Formula::Dia(a) => (0..m.worlds.len())
            .any(|v| m.acc_holds(w, v) && classical_satisfies(m, v, a)),
    }
}

/// A violation of a model-class condition, with a witness cycle where one
/// exists.
#[derive(Clone, Debug)]
pub struct ClassViolation {
    pub message: String,
    pub cycle: Vec<String>,
}

impl fmt::Display for ClassViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cycle.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{} (cycle: {})", self.message, self.cycle.join(" -> "))
        }
    }
}

fn find_cycle(n: usize, edge: impl Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    // DFS with colors; returns a cycle as a closed index path
    let mut color = vec![0u8; n]; // 0 white, 1 grey, 2 black
    let mut stack: Vec<usize> = Vec::new();
    fn dfs(
        u: usize,
        n: usize,
        edge: &impl Fn(usize, usize) -> bool,
        color: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        color[u] = 1;
        stack.push(u);
        for v in 0..n {
            if !edge(u, v) {
                continue;
            }
            if color[v] == 1 {
                let start = stack.iter().position(|&x| x == v).unwrap();
                let mut cyc = stack[start..].to_vec();
                cyc.push(v);
                return Some(cyc);
            }
            if color[v] == 0 {
                if let Some(c) = dfs(v, n, edge, color, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        color[u] = 2;
        None
    }
    for u in 0..n {
        if color[u] == 0 {
            if let Some(c) = dfs(u, n, &edge, &mut color, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

/// Membership in the birelational model class for IGL: `acc` transitive and
/// the composite `leq;acc` terminating (acyclic, since the model is finite).
pub fn check_igl_birel_class(m: &BirelModel) -> Result<(), ClassViolation> {
    let n = m.worlds.len();
    for &(a, b) in &m.acc {
        for &(b2, c) in &m.acc {
            if b2 == b && !m.acc_holds(a, c) {
                return Err(ClassViolation {
                    message: format!(
                        "acc is not transitive at {} R {} R {}",
                        m.worlds[a], m.worlds[b], m.worlds[c]
                    ),
                    cycle: vec![],
                });
            }
        }
    }
    let composite =
        |u: usize, v: usize| (0..n).any(|mid| m.leq_holds(u, mid) && m.acc_holds(mid, v));
    if let Some(cyc) = find_cycle(n, composite) {
        return Err(ClassViolation {
            message: "composite leq;acc is not terminating".to_owned(),
            cycle: cyc.into_iter().map(|i| m.worlds[i].clone()).collect(),
        });
    }
    Ok(())
}

/// A finite Kripke predicate structure: a poset of worlds, with a growing
/// domain, predicate table and accessibility relation at each world.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "KripkeJson", try_from = "KripkeJson")]
pub struct KripkeStructure {
    pub worlds: Vec<String>,
    pub leq: BTreeSet<(usize, usize)>,
    /// `domain[w]`: the elements of `D_w`.
    pub domain: Vec<BTreeSet<String>>,
    /// `pred[w]`: for each atom, the elements satisfying it at `w`.
    pub pred: Vec<BTreeMap<String, BTreeSet<String>>>,
    /// `rel[w]`: the relation `R_w` on `D_w`.
    pub rel: Vec<BTreeSet<(String, String)>>,
}

impl KripkeStructure {
    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn leq_holds(&self, w: usize, v: usize) -> bool {
        self.leq.contains(&(w, v))
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.worlds.len();
        if self.domain.len() != n || self.pred.len() != n || self.rel.len() != n {
            return Err("per-world tables must cover every world".to_owned());
        }
        for w in 0..n {
            if !self.leq_holds(w, w) {
                return Err(format!("leq is not reflexive at {}", self.worlds[w]));
            }
            if self.domain[w].is_empty() {
                return Err(format!("domain at {} is empty", self.worlds[w]));
            }
            for els in self.pred[w].values() {
                if !els.is_subset(&self.domain[w]) {
                    return Err(format!(
                        "predicate at {} mentions elements outside the domain",
                        self.worlds[w]
                    ));
                }
            }
            for (a, b) in &self.rel[w] {
                if !self.domain[w].contains(a) || !self.domain[w].contains(b) {
                    return Err(format!(
                        "relation at {} mentions elements outside the domain",
                        self.worlds[w]
                    ));
                }
            }
        }
        for &(a, b) in &self.leq {
            if a != b && self.leq_holds(b, a) {
                return Err("leq is not antisymmetric".to_owned());
            }
            for &(b2, c) in &self.leq {
                if b2 == b && !self.leq_holds(a, c) {
                    return Err("leq is not transitive".to_owned());
                }
            }
            if !self.domain[a].is_subset(&self.domain[b]) {
                return Err(format!(
                    "domain does not grow from {} to {}",
                    self.worlds[a], self.worlds[b]
                ));
            }
            for (p, els) in &self.pred[a] {
                let later = self.pred[b].get(p).cloned().unwrap_or_default();
                if !els.is_subset(&later) {
                    return Err(format!(
                        "predicate {p} is not monotone from {} to {}",
                        self.worlds[a], self.worlds[b]
                    ));
                }
            }
            if !self.rel[a].is_subset(&self.rel[b]) {
                return Err(format!(
                    "relation is not monotone from {} to {}",
                    self.worlds[a], self.worlds[b]
                ));
            }
        }
        Ok(())
    }

    /// The elements of the disjoint-union carrier `D_W = {(w, d)}`.
    pub fn dw_pairs(&self) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        for (w, dom) in self.domain.iter().enumerate() {
            for d in dom {
                out.push((w, d.clone()));
            }
        }
        out
    }
}

/// A `w`-environment: values for the labels at world `w`.
pub type Environment = BTreeMap<Label, String>;

fn kripke_eval(k: &KripkeStructure, w: usize, d: &str, f: &Formula) -> bool {
    match f {
        Formula::Atom(p) => k.pred[w].get(p).is_some_and(|els| els.contains(d)),
        Formula::Bottom => false,
        Formula::And(a, b) => kripke_eval(k, w, d, a) && kripke_eval(k, w, d, b),
        Formula::Or(a, b) => kripke_eval(k, w, d, a) || kripke_eval(k, w, d, b),
        Formula::Imp(a, b) => (0..k.worlds.len()).all(|w1| {
            !k.leq_holds(w, w1) || !kripke_eval(k, w1, d, a) || kripke_eval(k, w1, d, b)
        }),
        Formula::Box(a) => (0..k.worlds.len()).all(|w1| {
            if !k.leq_holds(w, w1) {
                return true;
            }
            k.domain[w1]
                .iter()
                .all(|e| !k.rel[w1].contains(&(d.to_owned(), e.clone())) || kripke_eval(k, w1, e, a))
        }),
        Formula::Dia(a) => k.domain[w]
            .iter()
            .any(|e| k.rel[w].contains(&(d.to_owned(), e.clone())) && kripke_eval(k, w, e, a)),
    }
}

/// Satisfaction of the labelled formula `x:f` at world `w` under `env`.
pub fn kripke_satisfies(
    k: &KripkeStructure,
    w: usize,
    env: &Environment,
    x: &Label,
    f: &Formula,
) -> bool {
    let d = env
        .get(x)
        .unwrap_or_else(|| panic!("environment undefined on label {x}"));
    kripke_eval(k, w, d, f)
}

/// Membership in the predicate-structure class for IGL: each `R_w`
/// transitive and the composite `leq_{D_W};R_{D_W}` terminating.
pub fn check_igl_pred_class(k: &KripkeStructure) -> Result<(), ClassViolation> {
    for (w, rel) in k.rel.iter().enumerate() {
        for (a, b) in rel {
            for (b2, c) in rel {
                if b2 == b && !rel.contains(&(a.clone(), c.clone())) {
                    return Err(ClassViolation {
                        message: format!(
                            "R at {} is not transitive on {a} R {b} R {c}",
                            k.worlds[w]
                        ),
                        cycle: vec![],
                    });
                }
            }
        }
    }
    let pairs = k.dw_pairs();
    let composite = |i: usize, j: usize| {
        let (w, d) = &pairs[i];
        let (w1, d1) = &pairs[j];
        // (w,d) <=_{D_W} (w',d) then (w',d) R_{D_W} (w',d')
        k.leq_holds(*w, *w1) && k.rel[*w1].contains(&(d.clone(), d1.clone()))
    };
    if let Some(cyc) = find_cycle(pairs.len(), composite) {
        return Err(ClassViolation {
            message: "composite leq;R over the disjoint union is not terminating".to_owned(),
            cycle: cyc
                .into_iter()
                .map(|i| format!("{}/{}", k.worlds[pairs[i].0], pairs[i].1))
                .collect(),
        });
    }
    Ok(())
}

/// The birelational model over the carrier `D_W` of a predicate structure:
/// worlds are pairs `(w, d)`, named `w/d`.
pub fn pred_to_birel(k: &KripkeStructure) -> BirelModel {
    let pairs = k.dw_pairs();
    let n = pairs.len();
    let mut leq = BTreeSet::new();
    let mut acc = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            let (w, d) = &pairs[i];
            let (w1, d1) = &pairs[j];
            if d == d1 && k.leq_holds(*w, *w1) {
                leq.insert((i, j));
            }
            if w == w1 && k.rel[*w].contains(&(d.clone(), d1.clone())) {
                acc.insert((i, j));
            }
        }
    }
    let val = pairs
        .iter()
        .map(|(w, d)| {
            k.pred[*w]
                .iter()
                .filter(|(_, els)| els.contains(d))
                .map(|(p, _)| p.clone())
                .collect()
        })
        .collect();
    BirelModel {
        worlds: pairs
            .iter()
            .map(|(w, d)| format!("{}/{}", k.worlds[*w], d))
            .collect(),
        leq,
        acc,
        val,
    }
}

/// An interpretation of a sequent's labels as worlds of a birelational
/// model.
pub type Interpretation = BTreeMap<Label, usize>;

/// Does `i` interpret every label of `s`, sending relational atoms into
/// `acc`?
pub fn valid_interpretation(m: &BirelModel, i: &Interpretation, s: &Sequent) -> bool {
    s.labels().iter().all(|l| {
        i.get(l).is_some_and(|w| *w < m.worlds.len())
    }) && s.rel.iter().all(|(x, y)| m.acc_holds(i[x], i[y]))
}

fn disj_satisfied(m: &BirelModel, i: &Interpretation, d: &DisjFormula) -> bool {
    d.disjuncts()
        .iter()
        .any(|l| birel_satisfies(m, i[&l.label], &l.formula))
}

/// Satisfaction of a sequent under an interpretation: if every antecedent
/// formula holds then some succedent formula holds.
pub fn seq_satisfied(m: &BirelModel, i: &Interpretation, s: &Sequent) -> bool {
    !s.lhs().iter().all(|d| disj_satisfied(m, i, d))
        || s.rhs().iter().any(|d| disj_satisfied(m, i, d))
}

/// Lift `i` so that `x` moves up to `w` while every other label moves up
/// `leq` and all relational atoms of `s` stay inside `acc`.  Deterministic:
/// the lexicographically least such interpretation (labels in sorted order,
/// worlds by index).  Existence is guaranteed on models satisfying F1/F2
/// with transitive `acc`; `None` therefore signals a model bug.
pub fn lift_interpretation(
    m: &BirelModel,
    s: &Sequent,
    i: &Interpretation,
    x: &Label,
    w: usize,
) -> Option<Interpretation> {
    let labels: Vec<Label> = s.labels().into_iter().collect();
    if !labels.contains(x) || !m.leq_holds(i[x], w) {
        return None;
    }
    fn search(
        m: &BirelModel,
        s: &Sequent,
        i: &Interpretation,
        labels: &[Label],
        pos: usize,
        fixed: (&Label, usize),
        acc: &mut Interpretation,
    ) -> bool {
        if pos == labels.len() {
            return s
                .rel
                .iter()
                .all(|(a, b)| m.acc_holds(acc[a], acc[b]));
        }
        let l = &labels[pos];
        let candidates: Vec<usize> = if l == fixed.0 {
            vec![fixed.1]
        } else {
            (0..m.worlds.len())
                .filter(|w1| m.leq_holds(i[l], *w1))
                .collect()
        };
        for c in candidates {
            acc.insert(l.clone(), c);
            if search(m, s, i, labels, pos + 1, fixed, acc) {
                return true;
            }
            acc.remove(l);
        }
        false
    }
    let mut out = Interpretation::new();
    if search(m, s, i, &labels, 0, (x, w), &mut out) {
        Some(out)
    } else {
        None
    }
}

/// Given a rule instance and an interpretation falsifying its conclusion on
/// a model in the IGL class, find a premiss and an interpretation moving
/// every old label up `leq` that falsifies it.  Exhaustive search; the local
/// soundness of the rules guarantees success.
pub fn local_soundness_witness(
    m: &BirelModel,
    r: &RuleInstance,
    i: &Interpretation,
) -> Option<(usize, Interpretation)> {
    for (idx, prem) in r.premisses.iter().enumerate() {
        let labels: Vec<Label> = prem.labels().into_iter().collect();
        // candidate worlds per label: leq-successors of the old value, or
        // anything for labels fresh in this premiss
        let mut assign = Interpretation::new();
        if assign_falsifying(m, prem, i, &labels, 0, &mut assign) {
            return Some((idx, assign));
        }
    }
    None
}

fn assign_falsifying(
    m: &BirelModel,
    prem: &Sequent,
    i: &Interpretation,
    labels: &[Label],
    pos: usize,
    acc: &mut Interpretation,
) -> bool {
    if pos == labels.len() {
        return valid_interpretation(m, acc, prem) && !seq_satisfied(m, acc, prem);
    }
    let l = &labels[pos];
    let candidates: Vec<usize> = match i.get(l) {
        Some(old) => (0..m.worlds.len())
            .filter(|w| m.leq_holds(*old, *w))
            .collect(),
        None => (0..m.worlds.len()).collect(),
    };
    for c in candidates {
        acc.insert(l.clone(), c);
        if assign_falsifying(m, prem, i, labels, pos + 1, acc) {
            return true;
        }
        acc.remove(l);
    }
    false
}

// --- enumeration of small models ---

/// All strict partial orders (transitive, irreflexive relations) on
/// `0..n`, as edge sets.
pub fn enumerate_strict_orders(n: usize) -> Vec<BTreeSet<(usize, usize)>> {
    // every strict order is an upper-triangular set under some permutation
    let upper: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut perms = Vec::new();
    permutations(n, &mut (0..n).collect::<Vec<_>>(), 0, &mut perms);
    let mut seen: BTreeSet<BTreeSet<(usize, usize)>> = BTreeSet::new();
    for mask in 0u64..(1 << upper.len()) {
        let base: BTreeSet<(usize, usize)> = upper
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, e)| *e)
            .collect();
        let transitive = base.iter().all(|&(a, b)| {
            base.iter()
                .all(|&(b2, c)| b2 != b || base.contains(&(a, c)))
        });
        if !transitive {
            continue;
        }
        for p in &perms {
            let img: BTreeSet<(usize, usize)> =
                base.iter().map(|&(a, b)| (p[a], p[b])).collect();
            seen.insert(img);
        }
    }
    seen.into_iter().collect()
}

fn permutations(n: usize, items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == n {
        out.push(items.clone());
        return;
    }
    for i in k..n {
        items.swap(k, i);
        permutations(n, items, k + 1, out);
        items.swap(k, i);
    }
}

fn reflexive_closure(n: usize, r: &BTreeSet<(usize, usize)>) -> BTreeSet<(usize, usize)> {
    let mut out = r.clone();
    for i in 0..n {
        out.insert((i, i));
    }
    out
}

/// Canonical form of a model under world permutation, for isomorphism
/// pruning.
fn canonical_key(m: &BirelModel, atoms: &[String]) -> Vec<u64> {
    let n = m.worlds.len();
    let mut perms = Vec::new();
    permutations(n, &mut (0..n).collect::<Vec<_>>(), 0, &mut perms);
    let mut best: Option<Vec<u64>> = None;
    for p in &perms {
        let mut key = Vec::new();
        let mut bits = |pairs: &BTreeSet<(usize, usize)>| {
            let mut b = 0u64;
            for &(a, c) in pairs {
                b |= 1 << (p[a] * n + p[c]);
            }
            key.push(b);
        };
        bits(&m.leq);
        bits(&m.acc);
        for atom in atoms {
            let mut b = 0u64;
            for w in 0..n {
                if m.val[w].contains(atom) {
                    b |= 1 << p[w];
                }
            }
            key.push(b);
        }
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.unwrap()
}

/// All birelational models in the IGL class with at most `max_worlds`
/// worlds over the given atoms, up to isomorphism.
pub fn enumerate_igl_models(max_worlds: usize, atoms: &[String]) -> Vec<BirelModel> {
    let mut out = Vec::new();
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    for n in 1..=max_worlds {
        let strict = enumerate_strict_orders(n);
        let leqs: Vec<BTreeSet<(usize, usize)>> = strict
            .iter()
            .map(|r| reflexive_closure(n, r))
            .collect();
        for leq in &leqs {
            // monotone valuations: upsets of leq, per atom
            let upsets: Vec<u64> = (0u64..(1 << n))
                .filter(|mask| {
                    leq.iter()
                        .all(|&(a, b)| mask >> a & 1 == 0 || mask >> b & 1 == 1)
                })
                .collect();
            for acc in &strict {
                let skeleton = BirelModel {
                    worlds: (0..n).map(|i| format!("w{i}")).collect(),
                    leq: leq.clone(),
                    acc: acc.clone(),
                    val: vec![BTreeSet::new(); n],
                };
                if skeleton.validate().is_err() && atoms.is_empty() {
                    continue;
                }
                // frame checks do not depend on the valuation
                let frame_ok = {
                    let mut frame = skeleton.clone();
                    frame.val = vec![BTreeSet::new(); n];
                    frame.validate().is_ok() && check_igl_birel_class(&frame).is_ok()
                };
                if !frame_ok {
                    continue;
                }
                // assign an upset to each atom
                let mut choice = vec![0usize; atoms.len()];
                loop {
                    let mut m = skeleton.clone();
                    for (ai, atom) in atoms.iter().enumerate() {
                        let mask = upsets[choice[ai]];
                        for w in 0..n {
                            if mask >> w & 1 == 1 {
                                m.val[w].insert(atom.clone());
                            }
                        }
                    }
                    if seen.insert(canonical_key(&m, atoms)) {
                        debug_assert!(m.validate().is_ok());
                        out.push(m);
                    }
                    // next choice vector
                    let mut k = 0;
                    loop {
                        if k == atoms.len() {
                            break;
                        }
                        choice[k] += 1;
                        if choice[k] < upsets.len() {
                            break;
                        }
                        choice[k] = 0;
                        k += 1;
                    }
                    if atoms.is_empty() || k == atoms.len() {
                        break;
                    }
                }
            }
        }
    }
    out
}

/// Render a birelational model in DOT format: solid edges for `acc`, dashed
/// for (the transitive reduction is not computed) non-reflexive `leq`.
pub fn model_to_dot(m: &BirelModel) -> String {
    let mut out = String::from("digraph model {\n  node [shape=ellipse];\n");
    for (i, w) in m.worlds.iter().enumerate() {
        let atoms: Vec<&str> = m.val[i].iter().map(|s| s.as_str()).collect();
        out.push_str(&format!("  n{i} [label=\"{w}: {{{}}}\"];\n", atoms.join(",")));
    }
    for &(a, b) in &m.acc {
        out.push_str(&format!("  n{a} -> n{b};\n"));
    }
    for &(a, b) in &m.leq {
        if a != b {
            out.push_str(&format!("  n{a} -> n{b} [style=dashed];\n"));
        }
    }
    out.push_str("}\n");
    out
}

// --- JSON mirrors (world names instead of indices) ---

#[derive(Serialize, Deserialize)]
struct BirelJson {
    worlds: Vec<String>,
    leq: Vec<(String, String)>,
    acc: Vec<(String, String)>,
    val: BTreeMap<String, BTreeSet<String>>,
}

impl From<BirelModel> for BirelJson {
    fn from(m: BirelModel) -> BirelJson {
        let name = |i: usize| m.worlds[i].clone();
        BirelJson {
            leq: m.leq.iter().map(|&(a, b)| (name(a), name(b))).collect(),
            acc: m.acc.iter().map(|&(a, b)| (name(a), name(b))).collect(),
            val: m
                .worlds
                .iter()
                .zip(&m.val)
                .map(|(w, v)| (w.clone(), v.clone()))
                .collect(),
            worlds: m.worlds,
        }
    }
}

impl TryFrom<BirelJson> for BirelModel {
    type Error = String;
    fn try_from(j: BirelJson) -> Result<BirelModel, String> {
        let idx = |w: &str| {
            j.worlds
                .iter()
                .position(|x| x == w)
                .ok_or_else(|| format!("unknown world `{w}`"))
        };
        let mut leq = BTreeSet::new();
        for (a, b) in &j.leq {
            leq.insert((idx(a)?, idx(b)?));
        }
        let mut acc = BTreeSet::new();
        for (a, b) in &j.acc {
            acc.insert((idx(a)?, idx(b)?));
        }
        let val = j
            .worlds
            .iter()
            .map(|w| j.val.get(w).cloned().unwrap_or_default())
            .collect();
        Ok(BirelModel {
            worlds: j.worlds,
            leq,
            acc,
            val,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct KripkeJson {
    worlds: Vec<String>,
    leq: Vec<(String, String)>,
    domain: BTreeMap<String, BTreeSet<String>>,
    pred: BTreeMap<String, BTreeMap<String, BTreeSet<String>>>,
    rel: BTreeMap<String, Vec<(String, String)>>,
}

impl From<KripkeStructure> for KripkeJson {
    fn from(k: KripkeStructure) -> KripkeJson {
        let name = |i: usize| k.worlds[i].clone();
        KripkeJson {
            leq: k.leq.iter().map(|&(a, b)| (name(a), name(b))).collect(),
            domain: k
                .worlds
                .iter()
                .zip(&k.domain)
                .map(|(w, d)| (w.clone(), d.clone()))
                .collect(),
            pred: k
                .worlds
                .iter()
                .zip(&k.pred)
                .map(|(w, p)| (w.clone(), p.clone()))
                .collect(),
            rel: k
                .worlds
                .iter()
                .zip(&k.rel)
                .map(|(w, r)| (w.clone(), r.iter().cloned().collect()))
                .collect(),
            worlds: k.worlds,
        }
    }
}

impl TryFrom<KripkeJson> for KripkeStructure {
    type Error = String;
    fn try_from(j: KripkeJson) -> Result<KripkeStructure, String> {
        let idx = |w: &str| {
            j.worlds
                .iter()
                .position(|x| x == w)
                .ok_or_else(|| format!("unknown world `{w}`"))
        };
        let mut leq = BTreeSet::new();
        for (a, b) in &j.leq {
            leq.insert((idx(a)?, idx(b)?));
        }
        let domain = j
            .worlds
            .iter()
            .map(|w| j.domain.get(w).cloned().unwrap_or_default())
            .collect();
        let pred = j
            .worlds
            .iter()
            .map(|w| j.pred.get(w).cloned().unwrap_or_default())
            .collect();
        let rel = j
            .worlds
            .iter()
            .map(|w| {
                j.rel
                    .get(w)
                    .cloned()
                    .unwrap_or_default()
                    .into_iter()
                    .collect()
            })
            .collect();
        Ok(KripkeStructure {
            worlds: j.worlds,
            leq,
            domain,
            pred,
            rel,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{contra_loeb, Formula};

    /// The five-world countermodel to contra-löb: two intuitionistic chains
    /// `w1 <= v1`, `w2 <= v2`, accessibility `w1 R w2`, `v1 R v2 R v3`
    /// (transitively closed), `p` true everywhere.
    pub(crate) fn contra_loeb_model() -> BirelModel {
        let worlds: Vec<String> = ["w1", "v1", "w2", "v2", "v3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut leq: BTreeSet<(usize, usize)> = (0..5).map(|i| (i, i)).collect();
        leq.insert((0, 1)); // w1 <= v1
        leq.insert((2, 3)); // w2 <= v2
        let acc: BTreeSet<(usize, usize)> =
            [(0, 2), (1, 3), (3, 4), (1, 4)].into_iter().collect();
        let val = (0..5).map(|_| BTreeSet::from(["p".to_owned()])).collect();
        BirelModel {
            worlds,
            leq,
            acc,
            val,
        }
    }

    #[test]
    fn contra_loeb_model_is_in_class_and_refutes() {
        let m = contra_loeb_model();
        m.validate().unwrap();
        check_igl_birel_class(&m).unwrap();
        let f = contra_loeb();
        assert!(!birel_satisfies(&m, 0, &f));
        assert!(birel_satisfies(&m, 0, &Formula::parse("<>p").unwrap()));
    }

    #[test]
    fn bottom_never_holds() {
        let m = contra_loeb_model();
        for w in 0..m.worlds.len() {
            assert!(!birel_satisfies(&m, w, &Formula::Bottom));
        }
    }

    #[test]
    fn class_violations_detected() {
        // w R w: the composite has a self-loop via reflexive leq
        let m = BirelModel {
            worlds: vec!["w".to_owned()],
            leq: [(0, 0)].into_iter().collect(),
            acc: [(0, 0)].into_iter().collect(),
            val: vec![BTreeSet::new()],
        };
        assert!(check_igl_birel_class(&m).is_err());
        // w <= v, v R w: composite cycle across two worlds
        let m = BirelModel {
            worlds: vec!["w".to_owned(), "v".to_owned()],
            leq: [(0, 0), (1, 1), (0, 1)].into_iter().collect(),
            acc: [(1, 0)].into_iter().collect(),
            val: vec![BTreeSet::new(); 2],
        };
        let v = check_igl_birel_class(&m).unwrap_err();
        assert!(!v.cycle.is_empty());
    }

    #[test]
    fn one_world_enumeration() {
        let models = enumerate_igl_models(1, &["p".to_owned()]);
        // empty acc is forced (w R w breaks termination): p true or false
        assert_eq!(models.len(), 2);
        for m in &models {
            assert!(m.acc.is_empty());
            check_igl_birel_class(m).unwrap();
        }
    }

    #[test]
    fn kripke_vacuous_box_and_empty_dia() {
        let k = KripkeStructure {
            worlds: vec!["w".to_owned()],
            leq: [(0, 0)].into_iter().collect(),
            domain: vec![BTreeSet::from(["d".to_owned()])],
            pred: vec![BTreeMap::from([(
                "p".to_owned(),
                BTreeSet::from(["d".to_owned()]),
            )])],
            rel: vec![BTreeSet::new()],
        };
        k.validate().unwrap();
        let env: Environment = [(Label::from("x"), "d".to_owned())].into_iter().collect();
        let x = Label::from("x");
        assert!(kripke_satisfies(&k, 0, &env, &x, &Formula::boxed(Formula::Bottom)));
        assert!(!kripke_satisfies(&k, 0, &env, &x, &Formula::dia(Formula::atom("p"))));
    }

    #[test]
    fn seq_satisfaction_basics() {
        let m = contra_loeb_model();
        let s = Sequent::parse("x:p => x:p").unwrap();
        for w in 0..m.worlds.len() {
            let i: Interpretation = [(Label::from("x"), w)].into_iter().collect();
            assert!(seq_satisfied(&m, &i, &s));
        }
        let goal = Sequent::goal("x", contra_loeb());
        let i: Interpretation = [(Label::from("x"), 0)].into_iter().collect();
        assert!(!seq_satisfied(&m, &i, &goal));
    }

    #[test]
    fn lift_follows_frame_condition_f1() {
        let m = contra_loeb_model();
        let s = Sequent::parse("xRy | x:p => y:p").unwrap();
        let i: Interpretation = [(Label::from("x"), 0), (Label::from("y"), 2)]
            .into_iter()
            .collect();
        assert!(valid_interpretation(&m, &i, &s));
        // lift x from w1 to v1: y must move to v2 (index 3)
        let lifted = lift_interpretation(&m, &s, &i, &Label::from("x"), 1).unwrap();
        assert_eq!(lifted[&Label::from("x")], 1);
        assert_eq!(lifted[&Label::from("y")], 3);
    }

    #[test]
    fn pred_to_birel_carrier_size() {
        let k = KripkeStructure {
            worlds: vec!["w".to_owned(), "v".to_owned()],
            leq: [(0, 0), (1, 1), (0, 1)].into_iter().collect(),
            domain: vec![
                BTreeSet::from(["a".to_owned()]),
                BTreeSet::from(["a".to_owned(), "b".to_owned()]),
            ],
            pred: vec![BTreeMap::new(), BTreeMap::new()],
            rel: vec![BTreeSet::new(), BTreeSet::new()],
        };
        k.validate().unwrap();
        let m = pred_to_birel(&k);
        assert_eq!(m.worlds.len(), 3);
        m.validate().unwrap();
    }

    #[test]
    fn model_json_round_trip() {
        let m = contra_loeb_model();
        let s = serde_json::to_string(&m).unwrap();
        let m2: BirelModel = serde_json::from_str(&s).unwrap();
        assert_eq!(m, m2);
    }
}
