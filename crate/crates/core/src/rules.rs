//! Inference rules of the labelled sequent calculi.
//!
//! The base system `K` has the usual labelled rules for each connective plus
//! identity, bottom-left, structural rules (weakening, contraction, relational
//! thinning `th`) and cut; `K4` adds the transitivity rule `tr`.  `IK4` is the
//! single-succedent (intuitionistic) restriction, `mIK4` the multi-succedent
//! variant whose `impR`/`boxR` premisses carry exactly one succedent formula,
//! and `dIK4` the extension whose formulas are disjunctions of labelled
//! formulas with the splitting rules `dis-orL` / `dis-orR`.
//!
//! Besides the primitive rules the checker understands *macro* forms, which
//! keep the principal formula in the premisses (built-in contraction); those
//! are the steps emitted by the proof search's saturation phase.

use crate::formula::{Formula, Label};
use crate::sequent::{
    multiset_eq, multiset_sub, multiset_union, DisjFormula, LabelledFormula, Sequent, Side,
};
use serde::{Deserialize, Serialize};
use std::fmt;

/// The proof systems handled by the checker and the prover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    /// Classical labelled K (no transitivity).
    K,
    /// Classical labelled K4; with the progress condition this is GL.
    K4,
    /// Single-succedent intuitionistic K4; with progress, IGL.
    IK4,
    /// Multi-succedent intuitionistic K4 (one succedent formula at
    /// `impR`/`boxR` premisses).
    MIK4,
    /// Disjunction-extended single-succedent system used by cut elimination.
    DIK4,
}

impl SystemId {
    pub fn has_tr(self) -> bool {
        self != SystemId::K
    }

    pub fn single_succedent(self) -> bool {
        matches!(self, SystemId::IK4 | SystemId::DIK4)
    }

    pub fn classical(self) -> bool {
        matches!(self, SystemId::K | SystemId::K4)
    }

    pub fn allows_disjunctions(self) -> bool {
        self == SystemId::DIK4
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemId::K => "k",
            SystemId::K4 => "k4",
            SystemId::IK4 => "ik4",
            SystemId::MIK4 => "mik4",
            SystemId::DIK4 => "dik4",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SystemId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "k" => Ok(SystemId::K),
            "k4" | "gl" => Ok(SystemId::K4),
            "ik4" | "igl" => Ok(SystemId::IK4),
            "mik4" | "migl" => Ok(SystemId::MIK4),
            "dik4" | "digl" => Ok(SystemId::DIK4),
            other => Err(format!("unknown system `{other}`")),
        }
    }
}

/// Rule names, including macro (contraction-retaining) forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleName {
    #[serde(rename = "id")]
    Id,
    #[serde(rename = "botL")]
    BotL,
    #[serde(rename = "cut")]
    Cut,
    #[serde(rename = "wL")]
    WL,
    #[serde(rename = "wR")]
    WR,
    #[serde(rename = "cL")]
    CL,
    #[serde(rename = "cR")]
    CR,
    #[serde(rename = "th")]
    Th,
    #[serde(rename = "tr")]
    Tr,
    #[serde(rename = "andL")]
    AndL,
    #[serde(rename = "andR")]
    AndR,
    #[serde(rename = "orL")]
    OrL,
    #[serde(rename = "orR")]
    OrR,
    #[serde(rename = "impL")]
    ImpL,
    #[serde(rename = "impR")]
    ImpR,
    #[serde(rename = "boxL")]
    BoxL,
    #[serde(rename = "boxR")]
    BoxR,
    #[serde(rename = "diaL")]
    DiaL,
    #[serde(rename = "diaR")]
    DiaR,
    #[serde(rename = "macro-andL")]
    MacroAndL,
    #[serde(rename = "macro-andR")]
    MacroAndR,
    #[serde(rename = "macro-orL")]
    MacroOrL,
    #[serde(rename = "macro-orR")]
    MacroOrR,
    #[serde(rename = "macro-impL")]
    MacroImpL,
    #[serde(rename = "macro-impR")]
    MacroImpR,
    #[serde(rename = "macro-boxL")]
    MacroBoxL,
    #[serde(rename = "macro-diaL")]
    MacroDiaL,
    #[serde(rename = "macro-diaR")]
    MacroDiaR,
    #[serde(rename = "dis-orL")]
    DisOrL,
    #[serde(rename = "dis-orR")]
    DisOrR,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_string(self).unwrap();
        f.write_str(s.trim_matches('"'))
    }
}

/// A rule instance: conclusion below, premisses above.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule: RuleName,
    pub conclusion: Sequent,
    pub premisses: Vec<Sequent>,
    /// The principal formula occurrence, if any.
    pub principal: Option<(Side, DisjFormula)>,
    /// Fresh label introduced by `boxR` / `diaL` and their macro forms.
    pub fresh: Option<Label>,
    /// The cut formula, for `cut` steps.
    pub cut_formula: Option<DisjFormula>,
}

impl RuleInstance {
    fn new(rule: RuleName, conclusion: Sequent, premisses: Vec<Sequent>) -> Self {
        RuleInstance {
            rule,
            conclusion,
            premisses,
            principal: None,
            fresh: None,
            cut_formula: None,
        }
    }

    fn with_principal(mut self, side: Side, d: DisjFormula) -> Self {
        self.principal = Some((side, d));
        self
    }

    fn with_fresh(mut self, l: Label) -> Self {
        self.fresh = Some(l);
        self
    }

    pub fn validate(&self, sys: SystemId) -> Result<(), String> {
        validate_instance(
            sys,
            self.rule,
            &self.conclusion,
            &self.premisses,
            self.fresh.as_ref(),
            self.cut_formula.as_ref(),
        )
    }
}

fn lf(label: &Label, f: &Formula) -> DisjFormula {
    DisjFormula::single(LabelledFormula::new(label.clone(), f.clone()))
}

/// Per-sequent well-formedness for a system: single-succedent shape and
/// degree restrictions.
pub fn check_sequent_shape(sys: SystemId, s: &Sequent) -> Result<(), String> {
    if sys.single_succedent() && s.rhs().len() != 1 {
        return Err(format!(
            "system {sys} is single-succedent but `{s}` has {} succedent formulas",
            s.rhs().len()
        ));
    }
    if !sys.allows_disjunctions() && !s.is_degree_one() {
        return Err(format!(
            "system {sys} does not allow disjunction formulas: `{s}`"
        ));
    }
    Ok(())
}

/// Validate one rule instance against the rule schemas of `sys`.
/// The principal occurrence is inferred from conclusion and premisses.
pub fn validate_instance(
    sys: SystemId,
    rule: RuleName,
    c: &Sequent,
    prem: &[Sequent],
    fresh: Option<&Label>,
    cut_formula: Option<&DisjFormula>,
) -> Result<(), String> {
    use RuleName::*;
    let arity_err = |want: usize| {
        Err(format!(
            "{rule}: expected {want} premisses, got {}",
            prem.len()
        ))
    };
    let rel_eq = |p: &Sequent| -> Result<(), String> {
        if p.rel == c.rel {
            Ok(())
        } else {
            Err(format!("{rule}: relational context must not change"))
        }
    };
    match rule {
        Id => {
            if !prem.is_empty() {
                return arity_err(0);
            }
            for d in c.rhs() {
                if !c.contains(Side::Lhs, d) {
                    continue;
                }
                if sys.allows_disjunctions() {
                    return Ok(()); // identity on arbitrary formulas
                }
                if let Some(l) = d.as_single() {
                    if matches!(l.formula, Formula::Atom(_)) {
                        return Ok(());
                    }
                }
            }
            Err(format!(
                "id: no atomic formula occurs on both sides of `{c}`"
            ))
        }
        BotL => {
            if !prem.is_empty() {
                return arity_err(0);
            }
            let has_bot = c.lhs().iter().any(|d| {
                d.as_single()
                    .is_some_and(|l| l.formula == Formula::Bottom)
            });
            if has_bot {
                Ok(())
            } else {
                Err(format!("botL: no `x:false` on the left of `{c}`"))
            }
        }
        WL | WR => {
            let [p] = prem else { return arity_err(1) };
            rel_eq(p)?;
            let (side, keep) = if rule == WL {
                (Side::Lhs, multiset_eq(p.rhs(), c.rhs()))
            } else {
                (Side::Rhs, multiset_eq(p.lhs(), c.lhs()))
            };
            if !keep {
                return Err(format!("{rule}: the other side must not change"));
            }
            let dropped = multiset_sub(c.side(side), p.side(side))
                .ok_or_else(|| format!("{rule}: premiss is not contained in conclusion"))?;
            if dropped.len() == 1 {
                Ok(())
            } else {
                Err(format!("{rule}: exactly one formula must be dropped"))
            }
        }
        CL | CR => {
            let [p] = prem else { return arity_err(1) };
            rel_eq(p)?;
            let (side, keep) = if rule == CL {
                (Side::Lhs, multiset_eq(p.rhs(), c.rhs()))
            } else {
                (Side::Rhs, multiset_eq(p.lhs(), c.lhs()))
            };
            if !keep {
                return Err(format!("{rule}: the other side must not change"));
            }
            let added = multiset_sub(p.side(side), c.side(side))
                .ok_or_else(|| format!("{rule}: conclusion is not contained in premiss"))?;
            match added.as_slice() {
                [d] if c.contains(side, d) => Ok(()),
                _ => Err(format!(
                    "{rule}: premiss must duplicate one formula of the conclusion"
                )),
            }
        }
        Th => {
            let [p] = prem else { return arity_err(1) };
            if !p.rel.is_subset(&c.rel) {
                return Err("th: premiss relational context must shrink".to_owned());
            }
            if multiset_eq(p.lhs(), c.lhs()) && multiset_eq(p.rhs(), c.rhs()) {
                Ok(())
            } else {
                Err("th: formulas must not change".to_owned())
            }
        }
        Tr => {
            if !sys.has_tr() {
                return Err(format!("tr is not available in system {sys}"));
            }
            let [p] = prem else { return arity_err(1) };
            if !(multiset_eq(p.lhs(), c.lhs()) && multiset_eq(p.rhs(), c.rhs())) {
                return Err("tr: formulas must not change".to_owned());
            }
            let added: Vec<_> = p.rel.difference(&c.rel).cloned().collect();
            let composable = |x: &Label, z: &Label| {
                c.rel.iter().any(|(a, y)| {
                    a == x && c.rel.contains(&(y.clone(), z.clone()))
                })
            };
            match added.as_slice() {
                [] => {
                    // degenerate instance: the composed edge was already there
                    if c.rel.iter().any(|(x, z)| composable(x, z)) {
                        Ok(())
                    } else {
                        Err("tr: no composable pair of relational atoms".to_owned())
                    }
                }
                [(x, z)] if composable(x, z) => Ok(()),
                _ => Err("tr: premiss must add one composed relational atom".to_owned()),
            }
        }
        AndL | OrR => {
            let [p] = prem else { return arity_err(1) };
            rel_eq(p)?;
            let (side, other_ok) = if rule == AndL {
                (Side::Lhs, multiset_eq(p.rhs(), c.rhs()))
            } else {
                (Side::Rhs, multiset_eq(p.lhs(), c.lhs()))
            };
            if !other_ok {
                return Err(format!("{rule}: the other side must not change"));
            }
            for d in c.side(side) {
                let Some(l) = d.as_single() else { continue };
                let parts = match (&l.formula, rule) {
                    (Formula::And(a, b), AndL) => [(**a).clone(), (**b).clone()],
                    (Formula::Or(a, b), OrR) => [(**a).clone(), (**b).clone()],
                    _ => continue,
                };
                for part in parts {
                    let want = c
                        .remove_one(side, d)
                        .unwrap()
                        .add_side(side, lf(&l.label, &part));
                    if multiset_eq(p.side(side), want.side(side)) {
                        return Ok(());
                    }
                }
            }
            Err(format!("{rule}: no matching principal formula in `{c}`"))
        }
        AndR | OrL => {
            let [p0, p1] = prem else { return arity_err(2) };
            rel_eq(p0)?;
            rel_eq(p1)?;
            let side = if rule == AndR { Side::Rhs } else { Side::Lhs };
            let other = if rule == AndR { Side::Lhs } else { Side::Rhs };
            if !(multiset_eq(p0.side(other), c.side(other))
                && multiset_eq(p1.side(other), c.side(other)))
            {
                return Err(format!("{rule}: the other side must not change"));
            }
            for d in c.side(side) {
                let Some(l) = d.as_single() else { continue };
                let (a, b) = match (&l.formula, rule) {
                    (Formula::And(a, b), AndR) | (Formula::Or(a, b), OrL) => (a, b),
                    _ => continue,
                };
                let base = c.remove_one(side, d).unwrap();
                let want0 = base.add_side(side, lf(&l.label, a));
                let want1 = base.add_side(side, lf(&l.label, b));
                if multiset_eq(p0.side(side), want0.side(side))
                    && multiset_eq(p1.side(side), want1.side(side))
                {
                    return Ok(());
                }
            }
            Err(format!("{rule}: no matching principal formula in `{c}`"))
        }
        ImpL => {
            let [p1, p2] = prem else { return arity_err(2) };
            rel_eq(p1)?;
            rel_eq(p2)?;
            for d in c.lhs() {
                let Some(l) = d.as_single() else { continue };
                let Formula::Imp(a, b) = &l.formula else { continue };
                let xa = lf(&l.label, a);
                let xb = lf(&l.label, b);
                if !p1.contains(Side::Rhs, &xa) || !p2.contains(Side::Lhs, &xb) {
                    continue;
                }
                let Some(p2_lhs) = multiset_sub(p2.lhs(), std::slice::from_ref(&xb)) else {
                    continue;
                };
                let Some(p1_rhs) = multiset_sub(p1.rhs(), std::slice::from_ref(&xa)) else {
                    continue;
                };
                let lhs_ok = c.remove_one(Side::Lhs, d).is_some_and(|rest| {
                    multiset_eq(&multiset_union(p1.lhs(), &p2_lhs), rest.lhs())
                });
                let rhs_ok = multiset_eq(&multiset_union(&p1_rhs, p2.rhs()), c.rhs());
                if lhs_ok && rhs_ok {
                    return Ok(());
                }
            }
            Err(format!("impL: no matching principal formula in `{c}`"))
        }
        ImpR => {
            let [p] = prem else { return arity_err(1) };
            rel_eq(p)?;
            for d in c.rhs() {
                let Some(l) = d.as_single() else { continue };
                let Formula::Imp(a, b) = &l.formula else { continue };
                let want_lhs = c.add_lhs(lf(&l.label, a));
                if !multiset_eq(p.lhs(), want_lhs.lhs()) {
                    continue;
                }
                let keep_delta = c
                    .remove_one(Side::Rhs, d)
                    .unwrap()
                    .add_rhs(lf(&l.label, b));
                if multiset_eq(p.rhs(), keep_delta.rhs()) {
                    return Ok(());
                }
                // `mIK4` drops the remaining succedent at this step.
                if sys == SystemId::MIK4 && p.rhs() == [lf(&l.label, b)] {
                    return Ok(());
                }
            }
            Err(format!("impR: no matching principal formula in `{c}`"))
        }
        BoxR | DiaL => {
            let [p] = prem else { return arity_err(1) };
            let added: Vec<_> = p.rel.difference(&c.rel).cloned().collect();
            let [(x, y)] = added.as_slice() else {
                return Err(format!("{rule}: premiss must add one relational atom"));
            };
            if c.labels().contains(y) {
                return Err(format!("{rule}: label {y} is not fresh"));
            }
            if let Some(f) = fresh {
                if f != y {
                    return Err(format!("{rule}: declared fresh label {f} does not match {y}"));
                }
            }
            if rule == BoxR {
                if !multiset_eq(p.lhs(), c.lhs()) {
                    return Err("boxR: left side must not change".to_owned());
                }
                for d in c.rhs() {
                    let Some(l) = d.as_single() else { continue };
                    if l.label != *x {
                        continue;
                    }
                    let Formula::Box(a) = &l.formula else { continue };
                    let keep_delta = c
                        .remove_one(Side::Rhs, d)
                        .unwrap()
                        .add_rhs(lf(y, a));
                    if multiset_eq(p.rhs(), keep_delta.rhs()) {
                        return Ok(());
                    }
                    if sys == SystemId::MIK4 && p.rhs() == [lf(y, a)] {
                        return Ok(());
                    }
                }
                Err(format!("boxR: no matching principal formula in `{c}`"))
            } else {
                if !multiset_eq(p.rhs(), c.rhs()) {
                    return Err("diaL: right side must not change".to_owned());
                }
                for d in c.lhs() {
                    let Some(l) = d.as_single() else { continue };
                    if l.label != *x {
                        continue;
                    }
                    let Formula::Dia(a) = &l.formula else { continue };
                    let want = c
                        .remove_one(Side::Lhs, d)
                        .unwrap()
                        .add_lhs(lf(y, a));
                    if multiset_eq(p.lhs(), want.lhs()) {
                        return Ok(());
                    }
                }
                Err(format!("diaL: no matching principal formula in `{c}`"))
            }
        }
        BoxL => {
            let [p] = prem else { return arity_err(1) };
            rel_eq(p)?;
            if !multiset_eq(p.rhs(), c.rhs()) {
                return Err("boxL: right side must not change".to_owned());
            }
            for d in c.lhs() {
                let Some(l) = d.as_single() else { continue };
                let Formula::Box(a) = &l.formula else { continue };
                for (x, y) in &c.rel {
                    if *x != l.label {
                        continue;
                    }
                    let want = c.remove_one(Side::Lhs, d).unwrap().add_lhs(lf(y, a));
                    if multiset_eq(p.lhs(), want.lhs()) {
                        return Ok(());
                    }
                }
            }
            Err(format!("boxL: no matching principal formula in `{c}`"))
        }
        DiaR => {
            let [p] = prem else { return arity_err(1) };
            rel_eq(p)?;
            if !multiset_eq(p.lhs(), c.lhs()) {
                return Err("diaR: left side must not change".to_owned());
            }
            for d in c.rhs() {
                let Some(l) = d.as_single() else { continue };
                let Formula::Dia(a) = &l.formula else { continue };
                for (x, y) in &c.rel {
                    if *x != l.label {
                        continue;
                    }
                    let want = c.remove_one(Side::Rhs, d).unwrap().add_rhs(lf(y, a));
                    if multiset_eq(p.rhs(), want.rhs()) {
                        return Ok(());
                    }
                }
            }
            Err(format!("diaR: no matching principal formula in `{c}`"))
        }
        Cut => {
            let [p1, p2] = prem else { return arity_err(2) };
            rel_eq(p1)?;
            rel_eq(p2)?;
            let candidates: Vec<DisjFormula> = match cut_formula {
                Some(f) => vec![f.clone()],
                None => p1
                    .rhs()
                    .iter()
                    .filter(|d| p2.contains(Side::Lhs, d))
                    .cloned()
                    .collect(),
            };
            for phi in candidates {
                let Some(p1_rhs) = multiset_sub(p1.rhs(), std::slice::from_ref(&phi)) else {
                    continue;
                };
                let Some(p2_lhs) = multiset_sub(p2.lhs(), std::slice::from_ref(&phi)) else {
                    continue;
                };
                if multiset_eq(&multiset_union(p1.lhs(), &p2_lhs), c.lhs())
                    && multiset_eq(&multiset_union(&p1_rhs, p2.rhs()), c.rhs())
                {
                    return Ok(());
                }
            }
            Err(format!("cut: no cut formula matches `{c}`"))
        }
        MacroAndL | MacroOrL => {
            let check = |p: &Sequent, allowed: &[DisjFormula]| -> Result<(), String> {
                rel_eq(p)?;
                if !multiset_eq(p.rhs(), c.rhs()) {
                    return Err(format!("{rule}: right side must not change"));
                }
                let extra = multiset_sub(p.lhs(), c.lhs())
                    .ok_or_else(|| format!("{rule}: conclusion must be kept in premiss"))?;
                if extra.is_empty() {
                    return Err(format!("{rule}: premiss must add something"));
                }
                if extra.iter().all(|e| allowed.contains(e)) {
                    Ok(())
                } else {
                    Err(format!("{rule}: premiss adds a non-component formula"))
                }
            };
            for d in c.lhs() {
                let Some(l) = d.as_single() else { continue };
                match (&l.formula, rule) {
                    (Formula::And(a, b), MacroAndL) => {
                        let [p] = prem else { return arity_err(1) };
                        let allowed = [lf(&l.label, a), lf(&l.label, b)];
                        if check(p, &allowed).is_ok() {
                            return Ok(());
                        }
                    }
                    (Formula::Or(a, b), MacroOrL) => {
                        let [p0, p1] = prem else { return arity_err(2) };
                        if check(p0, &[lf(&l.label, a)]).is_ok()
                            && check(p1, &[lf(&l.label, b)]).is_ok()
                        {
                            return Ok(());
                        }
                    }
                    _ => {}
                }
            }
            Err(format!("{rule}: no matching principal formula in `{c}`"))
        }
        MacroOrR | MacroDiaR | MacroImpR | MacroAndR => {
            if rule == MacroImpR && !sys.classical() {
                return Err(format!("{rule} is only available classically"));
            }
            // Right-side macro steps: premisses keep the conclusion and add
            // component formulas (macro-impR also adds on the left).
            let check_rhs =
                |p: &Sequent, allowed: &[DisjFormula], lhs_allowed: &[DisjFormula]| -> Result<(), String> {
                    rel_eq(p)?;
                    let extra_l = multiset_sub(p.lhs(), c.lhs())
                        .ok_or_else(|| format!("{rule}: left side must be kept"))?;
                    if !extra_l.iter().all(|e| lhs_allowed.contains(e)) {
                        return Err(format!("{rule}: premiss adds a non-component on the left"));
                    }
                    let extra = multiset_sub(p.rhs(), c.rhs())
                        .ok_or_else(|| format!("{rule}: conclusion must be kept in premiss"))?;
                    if extra.is_empty() && extra_l.is_empty() {
                        return Err(format!("{rule}: premiss must add something"));
                    }
                    if extra.iter().all(|e| allowed.contains(e)) {
                        Ok(())
                    } else {
                        Err(format!("{rule}: premiss adds a non-component formula"))
                    }
                };
            for d in c.rhs() {
                let Some(l) = d.as_single() else { continue };
                match (&l.formula, rule) {
                    (Formula::Or(a, b), MacroOrR) => {
                        let [p] = prem else { return arity_err(1) };
                        if check_rhs(p, &[lf(&l.label, a), lf(&l.label, b)], &[]).is_ok() {
                            return Ok(());
                        }
                    }
                    (Formula::And(a, b), MacroAndR) => {
                        let [p0, p1] = prem else { return arity_err(2) };
                        if check_rhs(p0, &[lf(&l.label, a)], &[]).is_ok()
                            && check_rhs(p1, &[lf(&l.label, b)], &[]).is_ok()
                        {
                            return Ok(());
                        }
                    }
                    (Formula::Imp(a, b), MacroImpR) => {
                        let [p] = prem else { return arity_err(1) };
                        if check_rhs(p, &[lf(&l.label, b)], &[lf(&l.label, a)]).is_ok() {
                            return Ok(());
                        }
                    }
                    (Formula::Dia(a), MacroDiaR) => {
                        let [p] = prem else { return arity_err(1) };
                        let allowed: Vec<DisjFormula> = c
                            .rel
                            .iter()
                            .filter(|(x, _)| *x == l.label)
                            .map(|(_, y)| lf(y, a))
                            .collect();
                        if check_rhs(p, &allowed, &[]).is_ok() {
                            return Ok(());
                        }
                    }
                    _ => {}
                }
            }
            Err(format!("{rule}: no matching principal formula in `{c}`"))
        }
        MacroImpL => {
            let [p1, p2] = prem else { return arity_err(2) };
            rel_eq(p1)?;
            rel_eq(p2)?;
            for d in c.lhs() {
                let Some(l) = d.as_single() else { continue };
                let Formula::Imp(a, b) = &l.formula else { continue };
                let xa = lf(&l.label, a);
                let xb = lf(&l.label, b);
                // first premiss: left side kept, succedent either gains `x:A`
                // (multi-succedent) or is replaced by it (single-succedent)
                let p1_ok = multiset_eq(p1.lhs(), c.lhs())
                    && if sys.single_succedent() {
                        p1.rhs() == std::slice::from_ref(&xa)
                    } else {
                        multiset_sub(p1.rhs(), c.rhs())
                            .is_some_and(|extra| extra == vec![xa.clone()])
                    };
                // second premiss: succedent kept, left side gains `x:B`
                let p2_ok = multiset_eq(p2.rhs(), c.rhs())
                    && multiset_sub(p2.lhs(), c.lhs())
                        .is_some_and(|extra| extra == vec![xb.clone()]);
                if p1_ok && p2_ok {
                    return Ok(());
                }
            }
            Err(format!("macro-impL: no matching principal formula in `{c}`"))
        }
        MacroBoxL => {
            let [p] = prem else { return arity_err(1) };
            rel_eq(p)?;
            if !multiset_eq(p.rhs(), c.rhs()) {
                return Err("macro-boxL: right side must not change".to_owned());
            }
            let extra = multiset_sub(p.lhs(), c.lhs())
                .ok_or_else(|| "macro-boxL: conclusion must be kept".to_owned())?;
            if extra.is_empty() {
                return Err("macro-boxL: premiss must add something".to_owned());
            }
            let ok = extra.iter().all(|e| {
                e.as_single().is_some_and(|ylf| {
                    c.lhs().iter().any(|d| {
                        d.as_single().is_some_and(|l| {
                            matches!(&l.formula, Formula::Box(a)
                                if **a == ylf.formula
                                    && c.rel.contains(&(l.label.clone(), ylf.label.clone())))
                        })
                    })
                })
            });
            if ok {
                Ok(())
            } else {
                Err("macro-boxL: premiss adds a formula not justified by a box".to_owned())
            }
        }
        MacroDiaL => {
            let [p] = prem else { return arity_err(1) };
            if !multiset_eq(p.rhs(), c.rhs()) {
                return Err("macro-diaL: right side must not change".to_owned());
            }
            let added: Vec<_> = p.rel.difference(&c.rel).cloned().collect();
            let [(x, y)] = added.as_slice() else {
                return Err("macro-diaL: premiss must add one relational atom".to_owned());
            };
            if c.labels().contains(y) {
                return Err(format!("macro-diaL: label {y} is not fresh"));
            }
            let extra = multiset_sub(p.lhs(), c.lhs())
                .ok_or_else(|| "macro-diaL: conclusion must be kept".to_owned())?;
            for d in c.lhs() {
                let Some(l) = d.as_single() else { continue };
                let Formula::Dia(a) = &l.formula else { continue };
                if l.label == *x && extra == vec![lf(y, a)] {
                    return Ok(());
                }
            }
            Err(format!("macro-diaL: no matching principal formula in `{c}`"))
        }
        DisOrL | DisOrR => {
            if !sys.allows_disjunctions() {
                return Err(format!("{rule} is only available in dik4"));
            }
            let side = if rule == DisOrL { Side::Lhs } else { Side::Rhs };
            let other = if rule == DisOrL { Side::Rhs } else { Side::Lhs };
            for d in c.side(side) {
                if d.degree() < 2 {
                    continue;
                }
                let (phi0, phi1) = d.split();
                let base = c.remove_one(side, d).unwrap();
                if rule == DisOrL {
                    let [p0, p1] = prem else { return arity_err(2) };
                    let ok = [(&phi0, p0), (&phi1, p1)].iter().all(|(phi, p)| {
                        p.rel == c.rel
                            && multiset_eq(p.side(other), c.side(other))
                            && multiset_eq(
                                p.side(side),
                                base.add_side(side, (*phi).clone()).side(side),
                            )
                    });
                    if ok {
                        return Ok(());
                    }
                } else {
                    let [p] = prem else { return arity_err(1) };
                    let ok = [&phi0, &phi1].iter().any(|phi| {
                        p.rel == c.rel
                            && multiset_eq(p.side(other), c.side(other))
                            && multiset_eq(
                                p.side(side),
                                base.add_side(side, (*phi).clone()).side(side),
                            )
                    });
                    if ok {
                        return Ok(());
                    }
                }
            }
            Err(format!("{rule}: no splittable formula matches in `{c}`"))
        }
    }
}

impl Sequent {
    pub(crate) fn add_side(&self, side: Side, d: DisjFormula) -> Sequent {
        match side {
            Side::Lhs => self.add_lhs(d),
            Side::Rhs => self.add_rhs(d),
        }
    }
}

/// Enumerate rule instances whose conclusion is `s`, deterministically:
/// rule-name order, then principal position, then premiss order.  For the
/// two-premiss rules with split contexts (`impL`) one canonical split is
/// produced (empty side contexts on the first premiss); structural rules and
/// cut, which apply everywhere, are not enumerated.
pub fn applicable_rules(s: &Sequent, sys: SystemId) -> Vec<RuleInstance> {
    let mut out = Vec::new();
    let single = sys.single_succedent();

    // id
    let mut seen = Vec::new();
    for d in s.rhs() {
        if seen.contains(d) || !s.contains(Side::Lhs, d) {
            continue;
        }
        let atomic = d
            .as_single()
            .is_some_and(|l| matches!(l.formula, Formula::Atom(_)));
        if atomic || sys.allows_disjunctions() {
            seen.push(d.clone());
            out.push(
                RuleInstance::new(RuleName::Id, s.clone(), vec![])
                    .with_principal(Side::Rhs, d.clone()),
            );
        }
    }
    // botL
    let mut seen = Vec::new();
    for d in s.lhs() {
        if seen.contains(d) {
            continue;
        }
        if d.as_single().is_some_and(|l| l.formula == Formula::Bottom) {
            seen.push(d.clone());
            out.push(
                RuleInstance::new(RuleName::BotL, s.clone(), vec![])
                    .with_principal(Side::Lhs, d.clone()),
            );
        }
    }

    let mut per_lhs: Vec<(DisjFormula, LabelledFormula)> = Vec::new();
    for d in s.lhs() {
        if let Some(l) = d.as_single() {
            if !per_lhs.iter().any(|(e, _)| e == d) {
                per_lhs.push((d.clone(), l.clone()));
            }
        }
    }
    let mut per_rhs: Vec<(DisjFormula, LabelledFormula)> = Vec::new();
    for d in s.rhs() {
        if let Some(l) = d.as_single() {
            if !per_rhs.iter().any(|(e, _)| e == d) {
                per_rhs.push((d.clone(), l.clone()));
            }
        }
    }

    // andL
    for (d, l) in &per_lhs {
        if let Formula::And(a, b) = &l.formula {
            for part in [a, b] {
                let p = s
                    .remove_one(Side::Lhs, d)
                    .unwrap()
                    .add_lhs(lf(&l.label, part));
                out.push(
                    RuleInstance::new(RuleName::AndL, s.clone(), vec![p])
                        .with_principal(Side::Lhs, d.clone()),
                );
            }
        }
    }
    // andR
    for (d, l) in &per_rhs {
        if let Formula::And(a, b) = &l.formula {
            let base = s.remove_one(Side::Rhs, d).unwrap();
            let p0 = base.add_rhs(lf(&l.label, a));
            let p1 = base.add_rhs(lf(&l.label, b));
            out.push(
                RuleInstance::new(RuleName::AndR, s.clone(), vec![p0, p1])
                    .with_principal(Side::Rhs, d.clone()),
            );
        }
    }
    // orL
    for (d, l) in &per_lhs {
        if let Formula::Or(a, b) = &l.formula {
            let base = s.remove_one(Side::Lhs, d).unwrap();
            let p0 = base.add_lhs(lf(&l.label, a));
            let p1 = base.add_lhs(lf(&l.label, b));
            out.push(
                RuleInstance::new(RuleName::OrL, s.clone(), vec![p0, p1])
                    .with_principal(Side::Lhs, d.clone()),
            );
        }
    }
    // orR
    for (d, l) in &per_rhs {
        if let Formula::Or(a, b) = &l.formula {
            for part in [a, b] {
                let p = s
                    .remove_one(Side::Rhs, d)
                    .unwrap()
                    .add_rhs(lf(&l.label, part));
                out.push(
                    RuleInstance::new(RuleName::OrR, s.clone(), vec![p])
                        .with_principal(Side::Rhs, d.clone()),
                );
            }
        }
    }
    // impL: canonical split (empty contexts on the first premiss)
    for (d, l) in &per_lhs {
        if let Formula::Imp(a, b) = &l.formula {
            let p1 = Sequent::new(s.rel.clone(), [], [lf(&l.label, a)]);
            let p2 = s
                .remove_one(Side::Lhs, d)
                .unwrap()
                .add_lhs(lf(&l.label, b));
            out.push(
                RuleInstance::new(RuleName::ImpL, s.clone(), vec![p1, p2])
                    .with_principal(Side::Lhs, d.clone()),
            );
        }
    }
    // impR
    for (d, l) in &per_rhs {
        if let Formula::Imp(a, b) = &l.formula {
            let rest = s.remove_one(Side::Rhs, d).unwrap();
            let p = if sys == SystemId::MIK4 || single {
                rest.with_rhs(vec![lf(&l.label, b)]).add_lhs(lf(&l.label, a))
            } else {
                rest.add_rhs(lf(&l.label, b)).add_lhs(lf(&l.label, a))
            };
            out.push(
                RuleInstance::new(RuleName::ImpR, s.clone(), vec![p])
                    .with_principal(Side::Rhs, d.clone()),
            );
        }
    }
    // boxL
    for (d, l) in &per_lhs {
        if let Formula::Box(a) = &l.formula {
            for (x, y) in &s.rel {
                if *x == l.label {
                    let p = s.remove_one(Side::Lhs, d).unwrap().add_lhs(lf(y, a));
                    out.push(
                        RuleInstance::new(RuleName::BoxL, s.clone(), vec![p])
                            .with_principal(Side::Lhs, d.clone()),
                    );
                }
            }
        }
    }
    // boxR
    for (d, l) in &per_rhs {
        if let Formula::Box(a) = &l.formula {
            let y = s.fresh_label();
            let rest = s.remove_one(Side::Rhs, d).unwrap();
            let p = if sys == SystemId::MIK4 || single {
                rest.with_rhs(vec![lf(&y, a)]).add_rel((l.label.clone(), y.clone()))
            } else {
                rest.add_rhs(lf(&y, a)).add_rel((l.label.clone(), y.clone()))
            };
            out.push(
                RuleInstance::new(RuleName::BoxR, s.clone(), vec![p])
                    .with_principal(Side::Rhs, d.clone())
                    .with_fresh(y),
            );
        }
    }
    // diaL
    for (d, l) in &per_lhs {
        if let Formula::Dia(a) = &l.formula {
            let y = s.fresh_label();
            let p = s
                .remove_one(Side::Lhs, d)
                .unwrap()
                .add_lhs(lf(&y, a))
                .add_rel((l.label.clone(), y.clone()));
            out.push(
                RuleInstance::new(RuleName::DiaL, s.clone(), vec![p])
                    .with_principal(Side::Lhs, d.clone())
                    .with_fresh(y),
            );
        }
    }
    // diaR
    for (d, l) in &per_rhs {
        if let Formula::Dia(a) = &l.formula {
            for (x, y) in &s.rel {
                if *x == l.label {
                    let p = s.remove_one(Side::Rhs, d).unwrap().add_rhs(lf(y, a));
                    out.push(
                        RuleInstance::new(RuleName::DiaR, s.clone(), vec![p])
                            .with_principal(Side::Rhs, d.clone()),
                    );
                }
            }
        }
    }
    // tr
    if sys.has_tr() {
        let mut added = Vec::new();
        for (x, y) in &s.rel {
            for (y2, z) in &s.rel {
                if y == y2 {
                    let atom = (x.clone(), z.clone());
                    if !s.rel.contains(&atom) && !added.contains(&atom) {
                        added.push(atom.clone());
                        out.push(RuleInstance::new(
                            RuleName::Tr,
                            s.clone(),
                            vec![s.add_rel(atom)],
                        ));
                    }
                }
            }
        }
    }
    // dis-or rules
    if sys.allows_disjunctions() {
        for d in s.lhs() {
            if d.degree() >= 2 {
                let (phi0, phi1) = d.split();
                let base = s.remove_one(Side::Lhs, d).unwrap();
                out.push(
                    RuleInstance::new(
                        RuleName::DisOrL,
                        s.clone(),
                        vec![base.add_lhs(phi0), base.add_lhs(phi1)],
                    )
                    .with_principal(Side::Lhs, d.clone()),
                );
            }
        }
        for d in s.rhs() {
            if d.degree() >= 2 {
                let (phi0, phi1) = d.split();
                let base = s.remove_one(Side::Rhs, d).unwrap();
                for phi in [phi0, phi1] {
                    out.push(
                        RuleInstance::new(
                            RuleName::DisOrR,
                            s.clone(),
                            vec![base.add_rhs(phi)],
                        )
                        .with_principal(Side::Rhs, d.clone()),
                    );
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str) -> Sequent {
        Sequent::parse(text).unwrap()
    }

    #[test]
    fn id_instance_enumerated() {
        let s = seq("x:p => x:p");
        let rules = applicable_rules(&s, SystemId::K);
        assert!(rules.iter().any(|r| r.rule == RuleName::Id));
    }

    #[test]
    fn tr_instance_enumerated() {
        let s = seq("xRy, yRz | => z:p");
        let rules = applicable_rules(&s, SystemId::K4);
        let tr: Vec<_> = rules.iter().filter(|r| r.rule == RuleName::Tr).collect();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr[0].premisses[0], seq("xRy, yRz, xRz | => z:p"));
        // no tr in K
        assert!(applicable_rules(&s, SystemId::K)
            .iter()
            .all(|r| r.rule != RuleName::Tr));
    }

    #[test]
    fn boxr_introduces_fresh_label() {
        let s = seq("=> x:[]p");
        let rules = applicable_rules(&s, SystemId::IK4);
        let boxr: Vec<_> = rules.iter().filter(|r| r.rule == RuleName::BoxR).collect();
        assert_eq!(boxr.len(), 1);
        assert_eq!(boxr[0].premisses[0], seq("xRy0 | => y0:p"));
    }

    #[test]
    fn dial_removes_principal() {
        let s = seq("x:<>p => x:q");
        let rules = applicable_rules(&s, SystemId::K);
        let dial: Vec<_> = rules.iter().filter(|r| r.rule == RuleName::DiaL).collect();
        assert_eq!(dial.len(), 1);
        assert_eq!(dial[0].premisses[0], seq("xRy0 | y0:p => x:q"));
    }

    #[test]
    fn enumerated_instances_validate() {
        for sys in [SystemId::K, SystemId::K4, SystemId::MIK4] {
            let s = seq("xRy | x:p & q, x:[]r, x:p -> q, x:<>p => x:q | r, x:<>q, x:[]p");
            for r in applicable_rules(&s, sys) {
                r.validate(sys)
                    .unwrap_or_else(|e| panic!("{sys}: {:?}: {e}", r.rule));
            }
        }
        let s = seq("xRy | x:p & q => x:[]p");
        for r in applicable_rules(&s, SystemId::IK4) {
            r.validate(SystemId::IK4)
                .unwrap_or_else(|e| panic!("{:?}: {e}", r.rule));
        }
    }

    #[test]
    fn split_contexts_validate_for_impl() {
        // The single-succedent impL with a genuine context split.
        let c = seq("xRy | x:[]([]p -> p), y:[]p -> p => y:p");
        let p1 = seq("xRy | x:[]([]p -> p) => y:[]p");
        let p2 = seq("xRy | y:p => y:p");
        validate_instance(SystemId::IK4, RuleName::ImpL, &c, &[p1, p2], None, None).unwrap();
    }

    #[test]
    fn freshness_violations_rejected() {
        let c = seq("=> x:[]p");
        // premiss reuses the conclusion label: not fresh
        let bad = seq("xRx | => x:p");
        assert!(
            validate_instance(SystemId::IK4, RuleName::BoxR, &c, &[bad], None, None).is_err()
        );
    }

    #[test]
    fn cut_validates_with_and_without_annotation() {
        let c = seq("x:p => x:q");
        let p1 = seq("x:p => x:r");
        let p2 = seq("x:r => x:q");
        validate_instance(SystemId::K, RuleName::Cut, &c, &[p1.clone(), p2.clone()], None, None)
            .unwrap();
        let phi = DisjFormula::single(LabelledFormula::parse("x:r").unwrap());
        validate_instance(SystemId::K, RuleName::Cut, &c, &[p1, p2], None, Some(&phi)).unwrap();
    }

    #[test]
    fn dis_or_rules_only_in_dik4() {
        let phi = DisjFormula::new(vec![
            LabelledFormula::parse("x:p").unwrap(),
            LabelledFormula::parse("y:q").unwrap(),
        ]);
        let c = Sequent::new([], [phi.clone()], [DisjFormula::single(
            LabelledFormula::parse("x:r").unwrap(),
        )]);
        let (phi0, phi1) = phi.split();
        let base = c.remove_one(Side::Lhs, &phi).unwrap();
        let p0 = base.add_lhs(phi0);
        let p1 = base.add_lhs(phi1);
        validate_instance(
            SystemId::DIK4,
            RuleName::DisOrL,
            &c,
            &[p0.clone(), p1.clone()],
            None,
            None,
        )
        .unwrap();
        assert!(validate_instance(SystemId::IK4, RuleName::DisOrL, &c, &[p0, p1], None, None)
            .is_err());
    }

    #[test]
    fn macro_impl_shapes() {
        // multi-succedent: first premiss keeps the succedent and adds x:p
        let c = seq("x:p -> q => x:r");
        let p1 = seq("x:p -> q => x:r, x:p");
        let p2 = seq("x:p -> q, x:q => x:r");
        validate_instance(SystemId::MIK4, RuleName::MacroImpL, &c, &[p1, p2], None, None)
            .unwrap();
        // single-succedent: first premiss replaces the succedent
        let p1 = seq("x:p -> q => x:p");
        let p2 = seq("x:p -> q, x:q => x:r");
        validate_instance(SystemId::IK4, RuleName::MacroImpL, &c, &[p1, p2], None, None)
            .unwrap();
    }
}
