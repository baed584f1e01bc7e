//! Saturation-based bottom-up proof search.
//!
//! The engine alternates an invertible phase (transitivity completion plus
//! contraction-retaining macro steps) with non-invertible expansion at
//! saturated sequents.  At each saturated sequent it first looks for a
//! companion among the saturated ancestors: an ancestor equal up to an
//! injective renaming closes the branch as a proof back-edge when the cycle
//! is progressing, and as a refutation loop when it is not; an ancestor
//! subsumed by the current sequent yields a proof back-edge through a chain
//! of weakening steps.  Search produces either a cyclic-proof certificate or
//! a refutation tree from which a countermodel can be extracted; bounds are
//! reported honestly as `Unknown`.

use crate::cyclic::{
    back_edge_trace_relation, compose, edge_trace_relation, check_progress, CyclicProof,
    ProofNode, Renaming, Step, TraceRel,
};
use crate::formula::{Formula, Label};
use crate::rules::{RuleName, SystemId};
use crate::sequent::{multiset_sub, multiset_subset, DisjFormula, LabelledFormula, Sequent, Side};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompanionPolicy {
    /// Companions are searched among the ancestors of the current branch
    /// (default; keeps refutation trees aligned with segment extraction).
    AncestorsOnly,
    /// Additionally reuse results for sequents seen on other branches
    /// (memoization across branches; back-edges still target ancestors).
    Global,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchConfig {
    pub system: SystemId,
    pub max_labels: usize,
    pub max_depth: usize,
    pub companion_policy: CompanionPolicy,
}

impl SearchConfig {
    pub fn for_system(system: SystemId) -> Self {
        SearchConfig {
            system,
            max_labels: 12,
            max_depth: 400,
            companion_policy: CompanionPolicy::AncestorsOnly,
        }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig::for_system(SystemId::IK4)
    }
}

/// A refutation tree: the strategy by which every Prover choice fails.
/// Invertible steps descend into one refuted premiss; saturated nodes list a
/// refuted premiss for every non-invertible rule instance; back-links close
/// non-progressing loops against equal-up-to-renaming ancestors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenierTree {
    pub system: SystemId,
    pub root: usize,
    pub nodes: Vec<DenierNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenierNode {
    pub sequent: Sequent,
    pub step: DenierStep,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DenierStep {
    /// An invertible step with its refuted premiss.
    Inv { rule: RuleName, child: usize },
    /// A saturated sequent with one refuted premiss per non-invertible rule
    /// instance (empty when there are none).
    Sat { successors: Vec<SatSuccessor> },
    /// A non-progressing loop to an ancestor equal up to renaming.
    BackLink { target: usize, renaming: Renaming },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatSuccessor {
    pub rule: RuleName,
    pub node: usize,
}

impl DenierTree {
    pub fn node(&self, id: usize) -> &DenierNode {
        &self.nodes[id]
    }

    fn children(&self, id: usize) -> Vec<usize> {
        match &self.nodes[id].step {
            DenierStep::Inv { child, .. } => vec![*child],
            DenierStep::Sat { successors } => successors.iter().map(|s| s.node).collect(),
            DenierStep::BackLink { .. } => vec![],
        }
    }

    /// Shape and loop validity: a tree rooted at `root`, back-links target
    /// ancestors, renamed companions match exactly, and no back-link cycle
    /// carries a progressing trace.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.nodes.len();
        if self.root >= n {
            return Err("root out of range".to_owned());
        }
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        for id in 0..n {
            for c in self.children(id) {
                if c >= n {
                    return Err(format!("node {id}: child {c} out of range"));
                }
                if parent.insert(c, id).is_some() || c == self.root {
                    return Err(format!("node {c} has two parents"));
                }
            }
        }
        let path_to = |id: usize| -> Option<Vec<usize>> {
            let mut path = vec![id];
            let mut cur = id;
            while cur != self.root {
                cur = *parent.get(&cur)?;
                if path.contains(&cur) {
                    return None;
                }
                path.push(cur);
            }
            path.reverse();
            Some(path)
        };
        for id in 0..n {
            let Some(path) = path_to(id) else {
                return Err(format!("node {id} is not reachable from the root"));
            };
            if let DenierStep::BackLink { target, renaming } = &self.nodes[id].step {
                if !path[..path.len() - 1].contains(target) {
                    return Err(format!("node {id}: back-link target {target} not an ancestor"));
                }
                let renamed = self.nodes[*target].sequent.rename(renaming);
                if renamed != self.nodes[id].sequent {
                    return Err(format!("node {id}: renamed companion differs"));
                }
                // the loop must not be progressing
                let start = path.iter().position(|p| p == target).unwrap();
                let mut rel: Option<TraceRel> = None;
                for w in path[start..].windows(2) {
                    let r = edge_trace_relation(
                        &self.nodes[w[0]].sequent,
                        &self.nodes[w[1]].sequent,
                    );
                    rel = Some(match rel {
                        None => r,
                        Some(acc) => compose(&acc, &r),
                    });
                }
                let back = back_edge_trace_relation(
                    &self.nodes[id].sequent,
                    &self.nodes[*target].sequent,
                    renaming,
                );
                let cycle = match rel {
                    None => back,
                    Some(acc) => compose(&acc, &back),
                };
                if cycle_progressing(&cycle) {
                    return Err(format!("node {id}: back-link cycle is progressing"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Provable(CyclicProof),
    Refutable(DenierTree),
    Unknown { reason: String, frontier: Sequent },
}

/// Does the infinite iteration of a cycle with composite trace relation `r`
/// carry an infinitely progressing trace?  Decided on the idempotent power
/// of `r` (which exists: the powers of `r` are eventually periodic).
pub(crate) fn cycle_progressing(r: &TraceRel) -> bool {
    let mut powers: Vec<TraceRel> = vec![r.clone()];
    loop {
        let next = compose(powers.last().unwrap(), r);
        if let Some(i) = powers.iter().position(|p| *p == next) {
            // powers[j] is r^(j+1); the sequence loops with tail i+1 and
            // period len-i, so the smallest multiple of the period at or
            // beyond the tail is an idempotent exponent
            let tail = i + 1;
            let period = powers.len() - i;
            let e = period * tail.div_ceil(period);
            let rep = tail + ((e - tail) % period);
            let idem = &powers[rep - 1];
            debug_assert_eq!(compose(idem, idem), *idem);
            return idem.iter().any(|((x, y), strict)| x == y && *strict);
        }
        powers.push(next);
        if powers.len() > 4096 {
            // unreachable in practice; be conservative
            return false;
        }
    }
}

// --- renaming search ---

fn label_profile(s: &Sequent) -> BTreeMap<Label, (Vec<Formula>, Vec<Formula>)> {
    let mut map: BTreeMap<Label, (Vec<Formula>, Vec<Formula>)> = BTreeMap::new();
    for l in s.labels() {
        map.entry(l).or_default();
    }
    for d in s.lhs() {
        for lf in d.disjuncts() {
            map.entry(lf.label.clone()).or_default().0.push(lf.formula.clone());
        }
    }
    for d in s.rhs() {
        for lf in d.disjuncts() {
            map.entry(lf.label.clone()).or_default().1.push(lf.formula.clone());
        }
    }
    for v in map.values_mut() {
        v.0.sort();
        v.1.sort();
    }
    map
}

fn sub_multiset<T: Ord + Clone>(small: &[T], big: &[T]) -> bool {
    let mut big: Vec<&T> = big.iter().collect();
    for x in small {
        match big.iter().position(|y| *y == x) {
            Some(i) => {
                big.remove(i);
            }
            None => return false,
        }
    }
    true
}

/// An injective renaming of the labels of `h` such that `rename(h)` equals
/// `t` (`subsumption = false`) or is contained in `t` componentwise
/// (`subsumption = true`).  Deterministic: lexicographically least in the
/// sorted label order of `h`.
pub(crate) fn find_renaming(h: &Sequent, t: &Sequent, subsumption: bool) -> Option<Renaming> {
    let hp = label_profile(h);
    let tp = label_profile(t);
    if !subsumption && hp.len() != tp.len() {
        return None;
    }
    let hl: Vec<&Label> = hp.keys().collect();
    let tl: Vec<&Label> = tp.keys().collect();
    fn bt(
        pos: usize,
        hl: &[&Label],
        tl: &[&Label],
        hp: &BTreeMap<Label, (Vec<Formula>, Vec<Formula>)>,
        tp: &BTreeMap<Label, (Vec<Formula>, Vec<Formula>)>,
        h: &Sequent,
        t: &Sequent,
        subsumption: bool,
        map: &mut Renaming,
        used: &mut Vec<Label>,
    ) -> bool {
        if pos == hl.len() {
            let renamed = h.rename(map);
            return if subsumption {
                renamed.rel.is_subset(&t.rel)
                    && multiset_subset(renamed.lhs(), t.lhs())
                    && multiset_subset(renamed.rhs(), t.rhs())
            } else {
                renamed == *t
            };
        }
        let x = hl[pos];
        let (xl, xr) = &hp[x];
        for y in tl {
            if used.contains(y) {
                continue;
            }
            let (yl, yr) = &tp[*y];
            let compatible = if subsumption {
                sub_multiset(xl, yl) && sub_multiset(xr, yr)
            } else {
                xl == yl && xr == yr
            };
            if !compatible {
                continue;
            }
            // partial relational consistency against already-mapped labels
            let ok = h.rel.iter().all(|(a, b)| {
                let ia = if a == x { Some(*y) } else { map.get(a) };
                let ib = if b == x { Some(*y) } else { map.get(b) };
                match (ia, ib) {
                    (Some(a1), Some(b1)) => t.rel.contains(&(a1.clone(), b1.clone())),
                    _ => true,
                }
            });
            if !ok {
                continue;
            }
            map.insert(x.clone(), (*y).clone());
            used.push((*y).clone());
            if bt(pos + 1, hl, tl, hp, tp, h, t, subsumption, map, used) {
                return true;
            }
            map.remove(x);
            used.pop();
        }
        false
    }
    let mut map = Renaming::new();
    let mut used = Vec::new();
    if bt(0, &hl, &tl, &hp, &tp, h, t, subsumption, &mut map, &mut used) {
        map.retain(|k, v| k != v);
        Some(map)
    } else {
        None
    }
}

/// First history entry equal to `s` up to injective renaming, oldest first.
pub fn detect_companion(s: &Sequent, history: &[Sequent]) -> Option<(usize, Renaming)> {
    for (i, h) in history.iter().enumerate() {
        if let Some(r) = find_renaming(h, s, false) {
            return Some((i, r));
        }
    }
    None
}

// --- rule instance construction used by the search ---

fn lf(label: &Label, f: &Formula) -> DisjFormula {
    DisjFormula::single(LabelledFormula::new(label.clone(), f.clone()))
}

#[derive(Clone, Debug)]
struct SearchInstance {
    rule: RuleName,
    fresh: Option<Label>,
    premisses: Vec<Sequent>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Classical,
    Multi,
    Single,
}

fn mode_of(sys: SystemId) -> Option<Mode> {
    match sys {
        SystemId::K | SystemId::K4 => Some(Mode::Classical),
        SystemId::MIK4 => Some(Mode::Multi),
        SystemId::IK4 => Some(Mode::Single),
        SystemId::DIK4 => None,
    }
}

fn singles(side: &[DisjFormula]) -> Vec<LabelledFormula> {
    let mut out: Vec<LabelledFormula> = Vec::new();
    for d in side {
        if let Some(l) = d.as_single() {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
    }
    out
}

/// The next invertible step at `s`, if any: `tr` completion first, then
/// contraction-retaining macro steps on unsaturated formulas (and, in the
/// single-succedent system, the deterministic succedent rules).
fn invertible_step(s: &Sequent, sys: SystemId, mode: Mode) -> Option<SearchInstance> {
    // tr: add the first missing composed atom
    if sys.has_tr() {
        for (x, y) in &s.rel {
            for (y2, z) in &s.rel {
                if y == y2 && !s.rel.contains(&(x.clone(), z.clone())) {
                    return Some(SearchInstance {
                        rule: RuleName::Tr,
                        fresh: None,
                        premisses: vec![s.add_rel((x.clone(), z.clone()))],
                    });
                }
            }
        }
    }
    // left-hand macro steps
    for l in singles(s.lhs()) {
        let x = &l.label;
        match &l.formula {
            Formula::And(a, b) => {
                let mut p = s.clone();
                let mut added = false;
                for part in [a, b] {
                    if !p.lhs_contains_labelled(&LabelledFormula::new(x.clone(), (**part).clone()))
                    {
                        p = p.add_lhs(lf(x, part));
                        added = true;
                    }
                }
                if added {
                    return Some(SearchInstance {
                        rule: RuleName::MacroAndL,
                        fresh: None,
                        premisses: vec![p],
                    });
                }
            }
            Formula::Or(a, b) => {
                let has = |f: &Formula| {
                    s.lhs_contains_labelled(&LabelledFormula::new(x.clone(), f.clone()))
                };
                if !has(a) && !has(b) {
                    return Some(SearchInstance {
                        rule: RuleName::MacroOrL,
                        fresh: None,
                        premisses: vec![s.add_lhs(lf(x, a)), s.add_lhs(lf(x, b))],
                    });
                }
            }
            Formula::Imp(a, b) => {
                if mode == Mode::Single {
                    continue; // a choice step in the single-succedent system
                }
                let analysed = s.rhs_contains_labelled(&LabelledFormula::new(
                    x.clone(),
                    (**a).clone(),
                )) || s.lhs_contains_labelled(&LabelledFormula::new(
                    x.clone(),
                    (**b).clone(),
                ));
                if !analysed {
                    return Some(SearchInstance {
                        rule: RuleName::MacroImpL,
                        fresh: None,
                        premisses: vec![s.add_rhs(lf(x, a)), s.add_lhs(lf(x, b))],
                    });
                }
            }
            Formula::Box(a) => {
                let mut p = s.clone();
                let mut added = false;
                for (x2, y) in &s.rel {
                    if x2 == x
                        && !p.lhs_contains_labelled(&LabelledFormula::new(
                            y.clone(),
                            (**a).clone(),
                        ))
                    {
                        p = p.add_lhs(lf(y, a));
                        added = true;
                    }
                }
                if added {
                    return Some(SearchInstance {
                        rule: RuleName::MacroBoxL,
                        fresh: None,
                        premisses: vec![p],
                    });
                }
            }
            Formula::Dia(a) => {
                let witnessed = s.rel.iter().any(|(x2, y)| {
                    x2 == x
                        && s.lhs_contains_labelled(&LabelledFormula::new(
                            y.clone(),
                            (**a).clone(),
                        ))
                });
                if !witnessed {
                    let y = s.fresh_label();
                    return Some(SearchInstance {
                        rule: RuleName::MacroDiaL,
                        fresh: Some(y.clone()),
                        premisses: vec![s
                            .add_rel((x.clone(), y.clone()))
                            .add_lhs(lf(&y, a))],
                    });
                }
            }
            _ => {}
        }
    }
    // right-hand steps
    match mode {
        Mode::Single => {
            // deterministic decomposition of the single succedent formula
            let l = s.rhs()[0].as_single()?.clone();
            let x = &l.label;
            match &l.formula {
                Formula::And(a, b) => Some(SearchInstance {
                    rule: RuleName::AndR,
                    fresh: None,
                    premisses: vec![s.with_rhs(vec![lf(x, a)]), s.with_rhs(vec![lf(x, b)])],
                }),
                Formula::Imp(a, b) => Some(SearchInstance {
                    rule: RuleName::ImpR,
                    fresh: None,
                    premisses: vec![s.with_rhs(vec![lf(x, b)]).add_lhs(lf(x, a))],
                }),
                Formula::Box(a) => {
                    let y = s.fresh_label();
                    Some(SearchInstance {
                        rule: RuleName::BoxR,
                        fresh: Some(y.clone()),
                        premisses: vec![s
                            .with_rhs(vec![lf(&y, a)])
                            .add_rel((x.clone(), y.clone()))],
                    })
                }
                _ => None,
            }
        }
        Mode::Multi | Mode::Classical => {
            for l in singles(s.rhs()) {
                let x = &l.label;
                match &l.formula {
                    Formula::And(a, b) => {
                        let has = |f: &Formula| {
                            s.rhs_contains_labelled(&LabelledFormula::new(x.clone(), f.clone()))
                        };
                        if !has(a) && !has(b) {
                            return Some(SearchInstance {
                                rule: RuleName::MacroAndR,
                                fresh: None,
                                premisses: vec![s.add_rhs(lf(x, a)), s.add_rhs(lf(x, b))],
                            });
                        }
                    }
                    Formula::Or(a, b) => {
                        let mut p = s.clone();
                        let mut added = false;
                        for part in [a, b] {
                            if !p.rhs_contains_labelled(&LabelledFormula::new(
                                x.clone(),
                                (**part).clone(),
                            )) {
                                p = p.add_rhs(lf(x, part));
                                added = true;
                            }
                        }
                        if added {
                            return Some(SearchInstance {
                                rule: RuleName::MacroOrR,
                                fresh: None,
                                premisses: vec![p],
                            });
                        }
                    }
                    Formula::Dia(a) => {
                        let mut p = s.clone();
                        let mut added = false;
                        for (x2, y) in &s.rel {
                            if x2 == x
                                && !p.rhs_contains_labelled(&LabelledFormula::new(
                                    y.clone(),
                                    (**a).clone(),
                                ))
                            {
                                p = p.add_rhs(lf(y, a));
                                added = true;
                            }
                        }
                        if added {
                            return Some(SearchInstance {
                                rule: RuleName::MacroDiaR,
                                fresh: None,
                                premisses: vec![p],
                            });
                        }
                    }
                    Formula::Imp(a, b) if mode == Mode::Classical => {
                        let mut p = s.clone();
                        let mut added = false;
                        if !p.lhs_contains_labelled(&LabelledFormula::new(
                            x.clone(),
                            (**a).clone(),
                        )) {
                            p = p.add_lhs(lf(x, a));
                            added = true;
                        }
                        if !p.rhs_contains_labelled(&LabelledFormula::new(
                            x.clone(),
                            (**b).clone(),
                        )) {
                            p = p.add_rhs(lf(x, b));
                            added = true;
                        }
                        if added {
                            return Some(SearchInstance {
                                rule: RuleName::MacroImpR,
                                fresh: None,
                                premisses: vec![p],
                            });
                        }
                    }
                    _ => {}
                }
            }
            None
        }
    }
}

/// Non-invertible rule instances at a saturated sequent, in deterministic
/// order.  Multi-succedent: one `impR` / `boxR` instance per succedent
/// implication / box, with the remaining succedent dropped.  Classical: one
/// `boxR` per succedent box (succedent retained).  Single-succedent:
/// `macro-impL` per antecedent implication, `orR` / `diaR` choices on the
/// succedent.
pub fn noninvertible_expand(s: &Sequent, sys: SystemId) -> Vec<SearchInstanceView> {
    let mode = mode_of(sys).expect("search systems only");
    expand_instances(s, mode)
        .into_iter()
        .map(|i| SearchInstanceView {
            rule: i.rule,
            fresh: i.fresh,
            premisses: i.premisses,
        })
        .collect()
}

/// Public view of a search step (rule name plus premisses).
#[derive(Clone, Debug)]
pub struct SearchInstanceView {
    pub rule: RuleName,
    pub fresh: Option<Label>,
    pub premisses: Vec<Sequent>,
}

fn expand_instances(s: &Sequent, mode: Mode) -> Vec<SearchInstance> {
    let mut out = Vec::new();
    match mode {
        Mode::Multi => {
            for l in singles(s.rhs()) {
                let x = &l.label;
                match &l.formula {
                    Formula::Imp(a, b) => out.push(SearchInstance {
                        rule: RuleName::ImpR,
                        fresh: None,
                        premisses: vec![s.with_rhs(vec![lf(x, b)]).add_lhs(lf(x, a))],
                    }),
                    Formula::Box(a) => {
                        let y = s.fresh_label();
                        out.push(SearchInstance {
                            rule: RuleName::BoxR,
                            fresh: Some(y.clone()),
                            premisses: vec![s
                                .with_rhs(vec![lf(&y, a)])
                                .add_rel((x.clone(), y.clone()))],
                        });
                    }
                    _ => {}
                }
            }
        }
        Mode::Classical => {
            for l in singles(s.rhs()) {
                if let Formula::Box(a) = &l.formula {
                    let x = &l.label;
                    let y = s.fresh_label();
                    let d = DisjFormula::single(l.clone());
                    out.push(SearchInstance {
                        rule: RuleName::BoxR,
                        fresh: Some(y.clone()),
                        premisses: vec![s
                            .remove_one(Side::Rhs, &d)
                            .unwrap()
                            .add_rhs(lf(&y, a))
                            .add_rel((x.clone(), y.clone()))],
                    });
                }
            }
        }
        Mode::Single => {
            for l in singles(s.lhs()) {
                if let Formula::Imp(a, b) = &l.formula {
                    let x = &l.label;
                    out.push(SearchInstance {
                        rule: RuleName::MacroImpL,
                        fresh: None,
                        premisses: vec![s.with_rhs(vec![lf(x, a)]), s.add_lhs(lf(x, b))],
                    });
                }
            }
            if let Some(l) = s.rhs()[0].as_single() {
                let x = &l.label;
                match &l.formula {
                    Formula::Or(a, b) => {
                        for part in [a, b] {
                            out.push(SearchInstance {
                                rule: RuleName::OrR,
                                fresh: None,
                                premisses: vec![s.with_rhs(vec![lf(x, part)])],
                            });
                        }
                    }
                    Formula::Dia(a) => {
                        for (x2, y) in &s.rel {
                            if x2 == x {
                                out.push(SearchInstance {
                                    rule: RuleName::DiaR,
                                    fresh: None,
                                    premisses: vec![s.with_rhs(vec![lf(y, a)])],
                                });
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    out
}

fn closed_by(s: &Sequent) -> Option<RuleName> {
    for d in s.lhs() {
        if d.as_single().is_some_and(|l| l.formula == Formula::Bottom) {
            return Some(RuleName::BotL);
        }
    }
    for d in s.rhs() {
        if d.as_single()
            .is_some_and(|l| matches!(l.formula, Formula::Atom(_)))
            && s.contains(Side::Lhs, d)
        {
            return Some(RuleName::Id);
        }
    }
    None
}

// --- search trees (assembled into certificates at the end) ---

#[derive(Clone, Debug)]
struct PTree {
    sequent: Sequent,
    stamp: u64,
    kind: PKind,
}

#[derive(Clone, Debug)]
enum PKind {
    Rule {
        rule: RuleName,
        fresh: Option<Label>,
        children: Vec<PTree>,
    },
    BackEdge {
        target_stamp: u64,
        renaming: Renaming,
    },
}

#[derive(Clone, Debug)]
struct DTree {
    sequent: Sequent,
    stamp: u64,
    kind: DKind,
}

#[derive(Clone, Debug)]
enum DKind {
    Inv {
        rule: RuleName,
        child: Box<DTree>,
    },
    Sat {
        successors: Vec<(RuleName, DTree)>,
    },
    BackLink {
        target_stamp: u64,
        renaming: Renaming,
    },
}

#[derive(Clone, Debug)]
enum Res {
    Proved(PTree),
    Refuted(DTree),
    Unknown(String, Sequent),
}

struct PathEntry {
    stamp: u64,
    sequent: Sequent,
    saturated: bool,
    /// trace relation from the previous path entry (empty at the root)
    rel_from_parent: TraceRel,
}

struct Search {
    cfg: SearchConfig,
    mode: Mode,
    next_stamp: u64,
    memo: HashMap<Sequent, (Res, ())>,
}

/// Lowest open-ancestor path index a result depends on (`None`: none).
type OpenDep = Option<usize>;

impl Search {
    fn stamp(&mut self) -> u64 {
        self.next_stamp += 1;
        self.next_stamp
    }

    fn search(&mut self, s: &Sequent, path: &mut Vec<PathEntry>) -> (Res, OpenDep) {
        if s.labels().len() > self.cfg.max_labels {
            return (
                Res::Unknown("label bound exceeded".to_owned(), s.clone()),
                None,
            );
        }
        if path.len() >= self.cfg.max_depth {
            return (
                Res::Unknown("depth bound exceeded".to_owned(), s.clone()),
                None,
            );
        }
        if let Some((res, ())) = self.memo.get(s) {
            return (res.clone(), None);
        }
        let stamp = self.stamp();
        let rel_from_parent = match path.last() {
            Some(parent) => edge_trace_relation(&parent.sequent, s),
            None => TraceRel::new(),
        };
        path.push(PathEntry {
            stamp,
            sequent: s.clone(),
            saturated: false,
            rel_from_parent,
        });
        let pos = path.len() - 1;
        let (res, dep) = self.search_at(s, stamp, pos, path);
        path.pop();
        let dep_out = match dep {
            Some(d) if d < pos => Some(d),
            _ => {
                // self-contained: safe to memoize
                if !matches!(res, Res::Unknown(..)) {
                    self.memo.insert(s.clone(), (res.clone(), ()));
                }
                None
            }
        };
        (res, dep_out)
    }

    fn search_at(
        &mut self,
        s: &Sequent,
        stamp: u64,
        pos: usize,
        path: &mut Vec<PathEntry>,
    ) -> (Res, OpenDep) {
        // 1. closure
        if let Some(rule) = closed_by(s) {
            return (
                Res::Proved(PTree {
                    sequent: s.clone(),
                    stamp,
                    kind: PKind::Rule {
                        rule,
                        fresh: None,
                        children: vec![],
                    },
                }),
                None,
            );
        }
        // 2. invertible phase
        if let Some(inst) = invertible_step(s, self.cfg.system, self.mode) {
            let mut children = Vec::new();
            let mut deps: Vec<OpenDep> = Vec::new();
            let mut refuted: Option<DTree> = None;
            let mut unknown: Option<(String, Sequent)> = None;
            for p in &inst.premisses {
                let (r, d) = self.search(p, path);
                deps.push(d);
                match r {
                    Res::Proved(t) => children.push(t),
                    Res::Refuted(t) => {
                        refuted = Some(t);
                        break;
                    }
                    Res::Unknown(reason, frontier) => {
                        unknown = Some((reason, frontier));
                        break;
                    }
                }
            }
            let dep = deps.iter().flatten().min().copied();
            if let Some(t) = refuted {
                return (
                    Res::Refuted(DTree {
                        sequent: s.clone(),
                        stamp,
                        kind: DKind::Inv {
                            rule: inst.rule,
                            child: Box::new(t),
                        },
                    }),
                    dep,
                );
            }
            if let Some((reason, frontier)) = unknown {
                return (Res::Unknown(reason, frontier), dep);
            }
            return (
                Res::Proved(PTree {
                    sequent: s.clone(),
                    stamp,
                    kind: PKind::Rule {
                        rule: inst.rule,
                        fresh: inst.fresh,
                        children,
                    },
                }),
                dep,
            );
        }
        // 3. saturated: companion formation, then expansion
        path[pos].saturated = true;
        for k in 0..pos {
            if !path[k].saturated {
                continue;
            }
            if let Some(renaming) = find_renaming(&path[k].sequent, s, false) {
                let cycle = self.cycle_relation(path, k, pos, &renaming);
                if cycle_progressing(&cycle) {
                    return (
                        Res::Proved(PTree {
                            sequent: s.clone(),
                            stamp,
                            kind: PKind::BackEdge {
                                target_stamp: path[k].stamp,
                                renaming,
                            },
                        }),
                        Some(k),
                    );
                } else {
                    return (
                        Res::Refuted(DTree {
                            sequent: s.clone(),
                            stamp,
                            kind: DKind::BackLink {
                                target_stamp: path[k].stamp,
                                renaming,
                            },
                        }),
                        Some(k),
                    );
                }
            }
        }
        for k in 0..pos {
            if !path[k].saturated {
                continue;
            }
            if let Some(renaming) = find_renaming(&path[k].sequent, s, true) {
                let cycle = self.cycle_relation(path, k, pos, &renaming);
                if cycle_progressing(&cycle) {
                    let tree = self.weakening_chain(s, stamp, &path[k].sequent, path[k].stamp, &renaming);
                    return (Res::Proved(tree), Some(k));
                }
            }
        }
        // 4. non-invertible expansion
        let instances = expand_instances(s, self.mode);
        if instances.is_empty() {
            return (
                Res::Refuted(DTree {
                    sequent: s.clone(),
                    stamp,
                    kind: DKind::Sat { successors: vec![] },
                }),
                None,
            );
        }
        let mut successors: Vec<(RuleName, DTree)> = Vec::new();
        let mut deps: Vec<OpenDep> = Vec::new();
        let mut unknown: Option<(String, Sequent)> = None;
        for inst in &instances {
            // an instance is proved if all premisses are proved, refuted if
            // some premiss is refuted
            let mut proved_children = Vec::new();
            let mut inst_refuted: Option<DTree> = None;
            let mut inst_unknown: Option<(String, Sequent)> = None;
            for p in &inst.premisses {
                let (r, d) = self.search(p, path);
                deps.push(d);
                match r {
                    Res::Proved(t) => proved_children.push(t),
                    Res::Refuted(t) => {
                        inst_refuted = Some(t);
                        break;
                    }
                    Res::Unknown(reason, frontier) => {
                        inst_unknown = Some((reason, frontier));
                        break;
                    }
                }
            }
            if inst_refuted.is_none() && inst_unknown.is_none() {
                // Prover wins through this instance
                let dep = deps.iter().flatten().min().copied();
                return (
                    Res::Proved(PTree {
                        sequent: s.clone(),
                        stamp,
                        kind: PKind::Rule {
                            rule: inst.rule,
                            fresh: inst.fresh.clone(),
                            children: proved_children,
                        },
                    }),
                    dep,
                );
            }
            if let Some(t) = inst_refuted {
                successors.push((inst.rule, t));
            } else if let Some(u) = inst_unknown {
                unknown = Some(u);
            }
        }
        let dep = deps.iter().flatten().min().copied();
        if let Some((reason, frontier)) = unknown {
            return (Res::Unknown(reason, frontier), dep);
        }
        (
            Res::Refuted(DTree {
                sequent: s.clone(),
                stamp,
                kind: DKind::Sat { successors },
            }),
            dep,
        )
    }

    /// Composite trace relation around the candidate cycle: ancestor `k`
    /// down to the current node (the last path entry), then back through the
    /// renaming.
    fn cycle_relation(
        &self,
        path: &[PathEntry],
        k: usize,
        pos: usize,
        renaming: &Renaming,
    ) -> TraceRel {
        let mut rel: Option<TraceRel> = None;
        for entry in &path[k + 1..=pos] {
            rel = Some(match rel {
                None => entry.rel_from_parent.clone(),
                Some(acc) => compose(&acc, &entry.rel_from_parent),
            });
        }
        let back =
            back_edge_trace_relation(&path[pos].sequent, &path[k].sequent, renaming);
        match rel {
            None => back,
            Some(acc) => compose(&acc, &back),
        }
    }

    /// A chain of `th` / `wL` / `wR` steps from `s` down to the renamed
    /// companion, ending in a back-edge.
    fn weakening_chain(
        &mut self,
        s: &Sequent,
        stamp: u64,
        companion: &Sequent,
        companion_stamp: u64,
        renaming: &Renaming,
    ) -> PTree {
        let target = companion.rename(renaming);
        let back = PTree {
            sequent: target.clone(),
            stamp: self.stamp(),
            kind: PKind::BackEdge {
                target_stamp: companion_stamp,
                renaming: renaming.clone(),
            },
        };
        // build bottom-up from the back-edge: wR chain, wL chain, th
        let mut cur = back;
        let extra_r: Vec<DisjFormula> =
            multiset_sub(s.rhs(), target.rhs()).expect("subsumption on the right");
        let extra_l: Vec<DisjFormula> =
            multiset_sub(s.lhs(), target.lhs()).expect("subsumption on the left");
        for d in extra_r.iter().rev() {
            let seq = cur.sequent.add_rhs(d.clone());
            cur = PTree {
                sequent: seq,
                stamp: self.stamp(),
                kind: PKind::Rule {
                    rule: RuleName::WR,
                    fresh: None,
                    children: vec![cur],
                },
            };
        }
        for d in extra_l.iter().rev() {
            let seq = cur.sequent.add_lhs(d.clone());
            cur = PTree {
                sequent: seq,
                stamp: self.stamp(),
                kind: PKind::Rule {
                    rule: RuleName::WL,
                    fresh: None,
                    children: vec![cur],
                },
            };
        }
        if cur.sequent.rel != s.rel {
            cur = PTree {
                sequent: s.clone(),
                stamp,
                kind: PKind::Rule {
                    rule: RuleName::Th,
                    fresh: None,
                    children: vec![cur],
                },
            };
        } else {
            // no relational atoms to drop: reuse the outer stamp on the top
            cur.stamp = stamp;
            debug_assert_eq!(cur.sequent, *s);
        }
        cur
    }
}

fn assemble_proof(sys: SystemId, root: &PTree) -> CyclicProof {
    let mut proof = CyclicProof::new(sys);
    let mut scope: BTreeMap<u64, u32> = BTreeMap::new();
    fn go(
        t: &PTree,
        proof: &mut CyclicProof,
        scope: &mut BTreeMap<u64, u32>,
    ) -> u32 {
        let id = proof.nodes.len() as u32;
        scope.insert(t.stamp, id);
        // placeholder; replaced after children are assigned
        proof.nodes.insert(id, ProofNode {
            sequent: t.sequent.clone(),
            step: Step::rule(RuleName::Id, vec![]),
        });
        let step = match &t.kind {
            PKind::Rule {
                rule,
                fresh,
                children,
            } => {
                let kids: Vec<u32> = children
                    .iter()
                    .map(|c| go(c, proof, scope))
                    .collect();
                Step::Rule {
                    rule: *rule,
                    premisses: kids,
                    fresh: fresh.clone(),
                    cut_formula: None,
                }
            }
            PKind::BackEdge {
                target_stamp,
                renaming,
            } => Step::BackEdge {
                target: *scope
                    .get(target_stamp)
                    .expect("back-edge target in scope"),
                renaming: renaming.clone(),
            },
        };
        proof.nodes.get_mut(&id).unwrap().step = step;
        scope.remove(&t.stamp);
        id
    }
    proof.root = go(root, &mut proof, &mut scope);
    proof
}

fn assemble_denier(sys: SystemId, root: &DTree) -> DenierTree {
    let mut tree = DenierTree {
        system: sys,
        root: 0,
        nodes: Vec::new(),
    };
    let mut scope: BTreeMap<u64, usize> = BTreeMap::new();
    fn go(t: &DTree, tree: &mut DenierTree, scope: &mut BTreeMap<u64, usize>) -> usize {
        let id = tree.nodes.len();
        scope.insert(t.stamp, id);
        tree.nodes.push(DenierNode {
            sequent: t.sequent.clone(),
            step: DenierStep::Sat { successors: vec![] },
        });
        let step = match &t.kind {
            DKind::Inv { rule, child } => DenierStep::Inv {
                rule: *rule,
                child: go(child, tree, scope),
            },
            DKind::Sat { successors } => DenierStep::Sat {
                successors: successors
                    .iter()
                    .map(|(rule, c)| SatSuccessor {
                        rule: *rule,
                        node: go(c, tree, scope),
                    })
                    .collect(),
            },
            DKind::BackLink {
                target_stamp,
                renaming,
            } => DenierStep::BackLink {
                target: *scope
                    .get(target_stamp)
                    .expect("back-link target in scope"),
                renaming: renaming.clone(),
            },
        };
        tree.nodes[id].step = step;
        scope.remove(&t.stamp);
        id
    }
    tree.root = go(root, &mut tree, &mut scope);
    tree
}

/// Search for a proof or refutation of the sequent `s`.
pub fn prove_sequent(s: &Sequent, cfg: &SearchConfig) -> SearchOutcome {
    let Some(mode) = mode_of(cfg.system) else {
        return SearchOutcome::Unknown {
            reason: format!("no search engine for system {}", cfg.system),
            frontier: s.clone(),
        };
    };
    let mut search = Search {
        cfg: cfg.clone(),
        mode,
        next_stamp: 0,
        memo: HashMap::new(),
    };
    let mut path = Vec::new();
    let (res, _) = search.search(s, &mut path);
    match res {
        Res::Proved(t) => {
            let proof = assemble_proof(cfg.system, &t);
            if let Err(e) = proof.check_local() {
                return SearchOutcome::Unknown {
                    reason: format!("assembled certificate failed local check: {e}"),
                    frontier: s.clone(),
                };
            }
            if let Err(e) = check_progress(&proof) {
                return SearchOutcome::Unknown {
                    reason: format!("assembled certificate failed progress check: {e}"),
                    frontier: s.clone(),
                };
            }
            SearchOutcome::Provable(proof)
        }
        Res::Refuted(t) => {
            let tree = assemble_denier(cfg.system, &t);
            match tree.validate() {
                Ok(()) => SearchOutcome::Refutable(tree),
                Err(e) => SearchOutcome::Unknown {
                    reason: format!("assembled refutation failed validation: {e}"),
                    frontier: s.clone(),
                },
            }
        }
        Res::Unknown(reason, frontier) => SearchOutcome::Unknown { reason, frontier },
    }
}

/// Search for a proof or refutation of the formula `f` at a single root
/// label `x`.
pub fn prove(f: &Formula, cfg: &SearchConfig) -> SearchOutcome {
    prove_sequent(&Sequent::goal("x", f.clone()), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{axiom_four, axiom_k, axiom_loeb, contra_loeb};

    fn outcome(f: &str, sys: SystemId) -> SearchOutcome {
        let formula = Formula::parse(f).unwrap();
        prove(&formula, &SearchConfig::for_system(sys))
    }

    fn expect_provable(f: &str, sys: SystemId) -> CyclicProof {
        match outcome(f, sys) {
            SearchOutcome::Provable(p) => p,
            other => panic!("{f} in {sys}: expected Provable, got {other:?}"),
        }
    }

    fn expect_refutable(f: &str, sys: SystemId) -> DenierTree {
        match outcome(f, sys) {
            SearchOutcome::Refutable(t) => t,
            other => panic!("{f} in {sys}: expected Refutable, got {other:?}"),
        }
    }

    #[test]
    fn atom_refutable_everywhere() {
        for sys in [SystemId::K, SystemId::K4, SystemId::IK4, SystemId::MIK4] {
            let t = expect_refutable("p", sys);
            assert_eq!(t.nodes.len(), 1);
        }
    }

    #[test]
    fn loeb_provable_in_igl_with_one_cycle() {
        let p = expect_provable(&axiom_loeb().to_string(), SystemId::IK4);
        assert_eq!(p.back_edge_count(), 1);
    }

    #[test]
    fn loeb_provable_in_migl_and_k4() {
        expect_provable(&axiom_loeb().to_string(), SystemId::MIK4);
        expect_provable(&axiom_loeb().to_string(), SystemId::K4);
    }

    #[test]
    fn axioms_k_and_four_provable_in_igl() {
        expect_provable(&axiom_k().to_string(), SystemId::IK4);
        expect_provable(&axiom_four().to_string(), SystemId::IK4);
        expect_provable(&axiom_four().to_string(), SystemId::K4);
    }

    #[test]
    fn excluded_middle_separates_k_from_igl() {
        expect_provable("p | ~p", SystemId::K);
        expect_refutable("p | ~p", SystemId::IK4);
    }

    #[test]
    fn contra_loeb_separates_classical_from_intuitionistic() {
        let f = contra_loeb().to_string();
        expect_provable(&f, SystemId::K4);
        expect_refutable(&f, SystemId::IK4);
        expect_refutable(&f, SystemId::MIK4);
    }

    #[test]
    fn peirce_like_refutation_uses_backlink() {
        let t = expect_refutable("(p -> q) -> p", SystemId::IK4);
        assert!(t
            .nodes
            .iter()
            .any(|n| matches!(n.step, DenierStep::BackLink { .. })));
    }

    #[test]
    fn detect_companion_oldest_first() {
        let a = Sequent::parse("xRy | x:[]p => y:p").unwrap();
        let b = Sequent::parse("xRz | x:[]p => z:p").unwrap();
        let (i, r) = detect_companion(&b, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(i, 0);
        assert_eq!(a.rename(&r), b);
    }

    #[test]
    fn unknown_on_tiny_label_bound() {
        let f = Formula::parse("<>p").unwrap();
        let mut cfg = SearchConfig::for_system(SystemId::IK4);
        cfg.max_labels = 1;
        // the goal itself is fine, but diaL would need a second label...
        // actually <>p on the right never introduces labels; use a left dia
        let s = Sequent::parse("x:<>p => x:q").unwrap();
        match prove_sequent(&s, &cfg) {
            SearchOutcome::Unknown { .. } => {}
            SearchOutcome::Refutable(_) | SearchOutcome::Provable(_) => {
                // with one label the macro-diaL premiss exceeds the bound
                panic!("expected Unknown under max_labels = 1");
            }
        }
        let _ = f;
    }
}
