//! Labelled sequents `R, Gamma => Delta`.
//!
//! A sequent carries a set of relational atoms `xRy` and two multisets of
//! formulas.  Ordinary systems use labelled formulas `x:A`; the
//! disjunction-extended system additionally allows formulas
//! `x1:A1 v ... v xd:Ad` whose number of disjuncts is their *degree*.
//! Multisets are kept sorted so that equality is multiset equality and all
//! enumeration orders are deterministic.

use crate::formula::{Formula, Label, ParseError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A labelled formula `x:A`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelledFormula {
    pub label: Label,
    pub formula: Formula,
}

impl LabelledFormula {
    pub fn new(label: impl Into<Label>, formula: Formula) -> Self {
        LabelledFormula {
            label: label.into(),
            formula,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let colon = text.find(':').ok_or_else(|| ParseError {
            offset: 0,
            expected: "`label:formula`".to_owned(),
            found: text.chars().take(8).collect(),
        })?;
        let label = text[..colon].trim();
        if !is_label(label) {
            return Err(ParseError {
                offset: 0,
                expected: "label ([a-z][a-z0-9_]*)".to_owned(),
                found: label.to_owned(),
            });
        }
        let formula = Formula::parse(&text[colon + 1..])?;
        Ok(LabelledFormula::new(label, formula))
    }
}

impl fmt::Display for LabelledFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.formula)
    }
}

fn is_label(s: &str) -> bool {
    let mut it = s.chars();
    match it.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    it.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// A nonempty disjunction of labelled formulas, kept sorted and deduplicated.
/// Degree-1 disjunctions are plain labelled formulas.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DisjFormula {
    disjuncts: Vec<LabelledFormula>,
}

impl DisjFormula {
    pub fn new(mut disjuncts: Vec<LabelledFormula>) -> Self {
        assert!(!disjuncts.is_empty(), "disjunction formulas are nonempty");
        disjuncts.sort();
        disjuncts.dedup();
        DisjFormula { disjuncts }
    }

    pub fn single(lf: LabelledFormula) -> Self {
        DisjFormula {
            disjuncts: vec![lf],
        }
    }

    pub fn degree(&self) -> usize {
        self.disjuncts.len()
    }

    pub fn disjuncts(&self) -> &[LabelledFormula] {
        &self.disjuncts
    }

    /// The canonical binary split: first disjunct versus the rest.
    /// Only meaningful for degree >= 2.
    pub fn split(&self) -> (DisjFormula, DisjFormula) {
        assert!(self.degree() >= 2);
        (
            DisjFormula::single(self.disjuncts[0].clone()),
            DisjFormula {
                disjuncts: self.disjuncts[1..].to_vec(),
            },
        )
    }

    pub fn as_single(&self) -> Option<&LabelledFormula> {
        if self.disjuncts.len() == 1 {
            Some(&self.disjuncts[0])
        } else {
            None
        }
    }

    pub fn contains(&self, lf: &LabelledFormula) -> bool {
        self.disjuncts.binary_search(lf).is_ok()
    }

    /// Union of two disjunctions (set union of disjuncts).
    pub fn union(&self, other: &DisjFormula) -> DisjFormula {
        let mut v = self.disjuncts.clone();
        v.extend(other.disjuncts.iter().cloned());
        DisjFormula::new(v)
    }

    pub fn labels(&self) -> BTreeSet<Label> {
        self.disjuncts.iter().map(|lf| lf.label.clone()).collect()
    }

    pub fn rename(&self, map: &BTreeMap<Label, Label>) -> DisjFormula {
        DisjFormula::new(
            self.disjuncts
                .iter()
                .map(|lf| LabelledFormula {
                    label: map.get(&lf.label).cloned().unwrap_or_else(|| lf.label.clone()),
                    formula: lf.formula.clone(),
                })
                .collect(),
        )
    }
}

impl From<LabelledFormula> for DisjFormula {
    fn from(lf: LabelledFormula) -> Self {
        DisjFormula::single(lf)
    }
}

impl fmt::Display for DisjFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" v ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

pub type RelAtom = (Label, Label);

/// A labelled sequent.  `lhs` and `rhs` are multisets kept in sorted order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequent {
    pub rel: BTreeSet<RelAtom>,
    lhs: Vec<DisjFormula>,
    rhs: Vec<DisjFormula>,
}

impl Sequent {
    pub fn new(
        rel: impl IntoIterator<Item = RelAtom>,
        lhs: impl IntoIterator<Item = DisjFormula>,
        rhs: impl IntoIterator<Item = DisjFormula>,
    ) -> Self {
        let mut lhs: Vec<_> = lhs.into_iter().collect();
        let mut rhs: Vec<_> = rhs.into_iter().collect();
        lhs.sort();
        rhs.sort();
        Sequent {
            rel: rel.into_iter().collect(),
            lhs,
            rhs,
        }
    }

    /// The goal sequent `=> x:A`.
    pub fn goal(label: impl Into<Label>, formula: Formula) -> Self {
        Sequent::new(
            [],
            [],
            [DisjFormula::single(LabelledFormula::new(label, formula))],
        )
    }

    pub fn lhs(&self) -> &[DisjFormula] {
        &self.lhs
    }

    pub fn rhs(&self) -> &[DisjFormula] {
        &self.rhs
    }

    pub fn side(&self, side: Side) -> &[DisjFormula] {
        match side {
            Side::Lhs => &self.lhs,
            Side::Rhs => &self.rhs,
        }
    }

    /// All labels occurring in the sequent (relational atoms and formulas).
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for (x, y) in &self.rel {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        for d in self.lhs.iter().chain(&self.rhs) {
            out.extend(d.labels());
        }
        out
    }

    /// Labels occurring in relational atoms only.
    pub fn rel_labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        for (x, y) in &self.rel {
            out.insert(x.clone());
            out.insert(y.clone());
        }
        out
    }

    /// A label of the form `y{n}` not occurring in the sequent.
    pub fn fresh_label(&self) -> Label {
        let used = self.labels();
        let mut n = 0usize;
        loop {
            let cand = Label(format!("y{n}"));
            if !used.contains(&cand) {
                return cand;
            }
            n += 1;
        }
    }

    pub fn add_lhs(&self, d: DisjFormula) -> Sequent {
        let mut s = self.clone();
        s.lhs.push(d);
        s.lhs.sort();
        s
    }

    pub fn add_rhs(&self, d: DisjFormula) -> Sequent {
        let mut s = self.clone();
        s.rhs.push(d);
        s.rhs.sort();
        s
    }

    pub fn with_rhs(&self, rhs: Vec<DisjFormula>) -> Sequent {
        Sequent::new(self.rel.clone(), self.lhs.clone(), rhs)
    }

    pub fn add_rel(&self, atom: RelAtom) -> Sequent {
        let mut s = self.clone();
        s.rel.insert(atom);
        s
    }

    /// Remove one occurrence of `d` from the given side; `None` if absent.
    pub fn remove_one(&self, side: Side, d: &DisjFormula) -> Option<Sequent> {
        let mut s = self.clone();
        let v = match side {
            Side::Lhs => &mut s.lhs,
            Side::Rhs => &mut s.rhs,
        };
        let i = v.binary_search(d).ok()?;
        v.remove(i);
        Some(s)
    }

    pub fn contains(&self, side: Side, d: &DisjFormula) -> bool {
        self.side(side).binary_search(d).is_ok()
    }

    /// Does the left side contain the labelled formula `x:A` (degree 1)?
    pub fn lhs_contains_labelled(&self, lf: &LabelledFormula) -> bool {
        self.contains(Side::Lhs, &DisjFormula::single(lf.clone()))
    }

    pub fn rhs_contains_labelled(&self, lf: &LabelledFormula) -> bool {
        self.contains(Side::Rhs, &DisjFormula::single(lf.clone()))
    }

    /// Apply a label renaming (identity outside the map's domain).
    pub fn rename(&self, map: &BTreeMap<Label, Label>) -> Sequent {
        let r = |l: &Label| map.get(l).cloned().unwrap_or_else(|| l.clone());
        Sequent::new(
            self.rel.iter().map(|(x, y)| (r(x), r(y))),
            self.lhs.iter().map(|d| d.rename(map)),
            self.rhs.iter().map(|d| d.rename(map)),
        )
    }

    /// Multiset inclusion of both sides plus relational inclusion:
    /// `other` can be reached from `self` by weakening steps.
    pub fn subsumes(&self, smaller: &Sequent) -> bool {
        smaller.rel.is_subset(&self.rel)
            && multiset_subset(&smaller.lhs, &self.lhs)
            && multiset_subset(&smaller.rhs, &self.rhs)
    }

    /// True if every formula has degree 1.
    pub fn is_degree_one(&self) -> bool {
        self.lhs
            .iter()
            .chain(&self.rhs)
            .all(|d| d.degree() == 1)
    }

    pub fn max_degree(&self) -> usize {
        self.lhs
            .iter()
            .chain(&self.rhs)
            .map(|d| d.degree())
            .max()
            .unwrap_or(1)
    }

    /// Is `rel` transitively closed?
    pub fn rel_transitive(&self) -> bool {
        for (x, y) in &self.rel {
            for (y2, z) in &self.rel {
                if y == y2 && !self.rel.contains(&(x.clone(), z.clone())) {
                    return false;
                }
            }
        }
        true
    }

    /// Parse the textual syntax `"xRy, yRz | x:p, y:[]q => z:r"`.
    /// Either segment of the antecedent may be empty, and the `|` may be
    /// omitted when there are no relational atoms.
    pub fn parse(text: &str) -> Result<Sequent, ParseError> {
        let arrow = text.find("=>").ok_or_else(|| ParseError {
            offset: text.len(),
            expected: "`=>`".to_owned(),
            found: "end of input".to_owned(),
        })?;
        let (ante, succ) = (&text[..arrow], &text[arrow + 2..]);
        // the divider between relational atoms and formulas is a `|` before
        // any `:`; a `|` after a colon sits inside a formula
        let bar = ante.find('|').filter(|b| !ante[..*b].contains(':'));
        let (rel_part, lhs_part) = match bar {
            Some(bar) => (&ante[..bar], &ante[bar + 1..]),
            None => ("", ante),
        };
        let mut rel = BTreeSet::new();
        for item in split_commas(rel_part) {
            rel.insert(parse_rel_atom(item)?);
        }
        let mut lhs = Vec::new();
        for item in split_commas(lhs_part) {
            lhs.push(DisjFormula::single(LabelledFormula::parse(item)?));
        }
        let mut rhs = Vec::new();
        for item in split_commas(succ) {
            rhs.push(DisjFormula::single(LabelledFormula::parse(item)?));
        }
        Ok(Sequent::new(rel, lhs, rhs))
    }
}

fn split_commas(s: &str) -> impl Iterator<Item = &str> {
    // Split at top level only: commas never occur inside formulas, so a
    // plain split suffices.
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

fn parse_rel_atom(item: &str) -> Result<RelAtom, ParseError> {
    // Relational atoms are written `xRy`; labels in them may not contain
    // uppercase letters, so the first `R` is the separator.
    let r = item.find('R').ok_or_else(|| ParseError {
        offset: 0,
        expected: "relational atom `xRy`".to_owned(),
        found: item.to_owned(),
    })?;
    let (x, y) = (item[..r].trim(), item[r + 1..].trim());
    if !is_label(x) || !is_label(y) {
        return Err(ParseError {
            offset: 0,
            expected: "relational atom `xRy`".to_owned(),
            found: item.to_owned(),
        });
    }
    Ok((Label::new(x), Label::new(y)))
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (x, y) in &self.rel {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "{x}R{y}")?;
            first = false;
        }
        if !self.rel.is_empty() {
            f.write_str(" | ")?;
        }
        for (i, d) in self.lhs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(" => ")?;
        for (i, d) in self.rhs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Which side of a sequent a formula occurrence sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lhs,
    Rhs,
}

// ---------------------------------------------------------------------------
// Multiset helpers over sorted vectors.
// ---------------------------------------------------------------------------

pub(crate) fn multiset_subset(small: &[DisjFormula], big: &[DisjFormula]) -> bool {
    multiset_difference(small, big).is_some_and(|d| d.is_empty())
}

/// `small - big` if `small` fits inside `big` occurrence-wise... returns the
/// leftover of `small` after cancelling against `big`; `None` never occurs.
/// (Kept total for simpler call sites.)
fn multiset_difference(small: &[DisjFormula], big: &[DisjFormula]) -> Option<Vec<DisjFormula>> {
    let mut big: Vec<&DisjFormula> = big.iter().collect();
    let mut rest = Vec::new();
    for d in small {
        if let Some(i) = big.iter().position(|b| *b == d) {
            big.remove(i);
        } else {
            rest.push(d.clone());
        }
    }
    Some(rest)
}

/// `a` minus `b`, as sorted multisets; `None` if some occurrence of `b`
/// is missing from `a`.
pub(crate) fn multiset_sub(a: &[DisjFormula], b: &[DisjFormula]) -> Option<Vec<DisjFormula>> {
    let mut out: Vec<DisjFormula> = a.to_vec();
    for d in b {
        let i = out.binary_search(d).ok()?;
        out.remove(i);
    }
    Some(out)
}

pub(crate) fn multiset_union(a: &[DisjFormula], b: &[DisjFormula]) -> Vec<DisjFormula> {
    let mut out: Vec<DisjFormula> = a.to_vec();
    out.extend(b.iter().cloned());
    out.sort();
    out
}

pub(crate) fn multiset_eq(a: &[DisjFormula], b: &[DisjFormula]) -> bool {
    a == b // both sorted
}

// ---------------------------------------------------------------------------
// Saturation
// ---------------------------------------------------------------------------

/// A saturation violation: the offending formula occurrence and side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationViolation {
    pub side: Side,
    pub formula: LabelledFormula,
    pub reason: String,
}

/// Saturation of a degree-1 sequent, judged up to multiplicity:
///
/// * `x:A&B` on the left: both conjuncts on the left;
///   on the right: some conjunct on the right;
/// * `x:A|B` on the left: some disjunct on the left;
///   on the right: both disjuncts on the right;
/// * `x:A->B` on the left: `x:A` on the right or `x:B` on the left;
/// * `x:[]A` on the left: `y:A` on the left for every `xRy`;
/// * `x:<>A` on the left: `y:A` on the left for some `xRy`;
///   on the right: `y:A` on the right for every `xRy`;
/// * the relational context is transitively closed (unless `require_tr`
///   is false, for systems without transitivity).
///
/// Right-hand `->` and `[]` (and left-hand atoms) impose no condition.
pub fn is_saturated(s: &Sequent, require_tr: bool) -> (bool, Vec<SaturationViolation>) {
    let mut violations = Vec::new();
    if require_tr && !s.rel_transitive() {
        violations.push(SaturationViolation {
            side: Side::Lhs,
            formula: LabelledFormula::new("x", Formula::Bottom),
            reason: "relational context not transitively closed".to_owned(),
        });
    }
    let mut note = |side: Side, lf: &LabelledFormula, reason: &str| {
        violations.push(SaturationViolation {
            side,
            formula: lf.clone(),
            reason: reason.to_owned(),
        })
    };
    for d in s.lhs() {
        let Some(lf) = d.as_single() else { continue };
        let x = &lf.label;
        match &lf.formula {
            Formula::And(a, b) => {
                if !s.lhs_contains_labelled(&LabelledFormula::new(x.clone(), (**a).clone()))
                    || !s.lhs_contains_labelled(&LabelledFormula::new(x.clone(), (**b).clone()))
                {
                    note(Side::Lhs, lf, "conjunction on the left lacks a conjunct");
                }
            }
            Formula::Or(a, b) => {
                if !s.lhs_contains_labelled(&LabelledFormula::new(x.clone(), (**a).clone()))
                    && !s.lhs_contains_labelled(&LabelledFormula::new(x.clone(), (**b).clone()))
                {
                    note(Side::Lhs, lf, "disjunction on the left lacks both disjuncts");
                }
            }
            Formula::Imp(a, b) => {
                if !s.rhs_contains_labelled(&LabelledFormula::new(x.clone(), (**a).clone()))
                    && !s.lhs_contains_labelled(&LabelledFormula::new(x.clone(), (**b).clone()))
                {
                    note(Side::Lhs, lf, "implication on the left not yet analysed");
                }
            }
            Formula::Box(a) => {
                for (u, y) in &s.rel {
                    if u == x
                        && !s.lhs_contains_labelled(&LabelledFormula::new(
                            y.clone(),
                            (**a).clone(),
                        ))
                    {
                        note(Side::Lhs, lf, "box on the left missing at a successor");
                        break;
                    }
                }
            }
            Formula::Dia(a) => {
                let witnessed = s.rel.iter().any(|(u, y)| {
                    u == x
                        && s.lhs_contains_labelled(&LabelledFormula::new(y.clone(), (**a).clone()))
                });
                if !witnessed {
                    note(Side::Lhs, lf, "diamond on the left has no witness");
                }
            }
            Formula::Atom(_) | Formula::Bottom => {}
        }
    }
    for d in s.rhs() {
        let Some(lf) = d.as_single() else { continue };
        let x = &lf.label;
        match &lf.formula {
            Formula::And(a, b) => {
                if !s.rhs_contains_labelled(&LabelledFormula::new(x.clone(), (**a).clone()))
                    && !s.rhs_contains_labelled(&LabelledFormula::new(x.clone(), (**b).clone()))
                {
                    note(Side::Rhs, lf, "conjunction on the right lacks a conjunct");
                }
            }
            Formula::Or(a, b) => {
                if !s.rhs_contains_labelled(&LabelledFormula::new(x.clone(), (**a).clone()))
                    || !s.rhs_contains_labelled(&LabelledFormula::new(x.clone(), (**b).clone()))
                {
                    note(Side::Rhs, lf, "disjunction on the right lacks a disjunct");
                }
            }
            Formula::Dia(a) => {
                for (u, y) in &s.rel {
                    if u == x
                        && !s.rhs_contains_labelled(&LabelledFormula::new(
                            y.clone(),
                            (**a).clone(),
                        ))
                    {
                        note(Side::Rhs, lf, "diamond on the right missing at a successor");
                        break;
                    }
                }
            }
            _ => {}
        }
    }
    (violations.is_empty(), violations)
}

// ---------------------------------------------------------------------------
// Quasi-tree shape
// ---------------------------------------------------------------------------

/// A sequent is quasi-tree-like if either its relational context is empty and
/// all labels coincide with the (single) succedent label, or there is a tree
/// `R0 subseteq rel subseteq rel-closure(R0)` whose nodes cover every label of
/// the sequent.  Returns a supporting tree (as parent edges) on success.
pub fn is_quasi_tree_like(s: &Sequent) -> Option<Vec<RelAtom>> {
    if s.rel.is_empty() {
        let labels = s.labels();
        if labels.len() <= 1 {
            return Some(Vec::new());
        }
        return None;
    }
    let nodes: Vec<Label> = s.rel_labels().into_iter().collect();
    if !s.labels().is_subset(&nodes.iter().cloned().collect()) {
        return None;
    }
    // Try every choice of root and of a parent (an incoming rel edge) for all
    // other nodes; check that the result is a tree whose transitive closure
    // covers `rel`.
    let n = nodes.len();
    for root in 0..n {
        let mut parent_options: Vec<Vec<usize>> = Vec::with_capacity(n);
        for (i, node) in nodes.iter().enumerate() {
            if i == root {
                parent_options.push(vec![usize::MAX]);
                continue;
            }
            let opts: Vec<usize> = nodes
                .iter()
                .enumerate()
                .filter(|(j, p)| *j != i && s.rel.contains(&((*p).clone(), node.clone())))
                .map(|(j, _)| j)
                .collect();
            if opts.is_empty() {
                parent_options.clear();
                break;
            }
            parent_options.push(opts);
        }
        if parent_options.is_empty() {
            continue;
        }
        let mut choice = vec![0usize; n];
        'assign: loop {
            let parents: Vec<usize> = (0..n)
                .map(|i| {
                    if i == root {
                        usize::MAX
                    } else {
                        parent_options[i][choice[i]]
                    }
                })
                .collect();
            if let Some(tree) = check_tree(&nodes, &parents, root, &s.rel) {
                return Some(tree);
            }
            // advance the choice vector
            for i in 0..n {
                if i == root {
                    continue;
                }
                choice[i] += 1;
                if choice[i] < parent_options[i].len() {
                    continue 'assign;
                }
                choice[i] = 0;
            }
            break;
        }
    }
    None
}

fn check_tree(
    nodes: &[Label],
    parents: &[usize],
    root: usize,
    rel: &BTreeSet<RelAtom>,
) -> Option<Vec<RelAtom>> {
    let n = nodes.len();
    // acyclicity / connectivity: walking up from each node must reach root.
    for mut i in 0..n {
        let mut steps = 0;
        while i != root {
            i = parents[i];
            steps += 1;
            if steps > n {
                return None;
            }
        }
    }
    // rel must sit inside the transitive closure of the tree edges.
    let ancestor = |mut i: usize, j: usize| -> bool {
        // is nodes[j] a strict ancestor of nodes[i]?
        while i != root {
            i = parents[i];
            if i == j {
                return true;
            }
        }
        false
    };
    for (x, y) in rel {
        let xi = nodes.iter().position(|l| l == x)?;
        let yi = nodes.iter().position(|l| l == y)?;
        if !ancestor(yi, xi) {
            return None;
        }
    }
    Some(
        (0..n)
            .filter(|&i| i != root)
            .map(|i| (nodes[parents[i]].clone(), nodes[i].clone()))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// JSON mirrors: labelled formulas as "x:A" strings, disjunctions as arrays.
// ---------------------------------------------------------------------------

impl Serialize for LabelledFormula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LabelledFormula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        LabelledFormula::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DisjFormula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.disjuncts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DisjFormula {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<LabelledFormula>::deserialize(d)?;
        if v.is_empty() {
            return Err(serde::de::Error::custom("empty disjunction formula"));
        }
        Ok(DisjFormula::new(v))
    }
}

#[derive(Serialize, Deserialize)]
struct SequentJson {
    rel: Vec<(Label, Label)>,
    lhs: Vec<DisjFormula>,
    rhs: Vec<DisjFormula>,
}

impl Serialize for Sequent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SequentJson {
            rel: self.rel.iter().cloned().collect(),
            lhs: self.lhs.clone(),
            rhs: self.rhs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sequent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = SequentJson::deserialize(d)?;
        Ok(Sequent::new(j.rel, j.lhs, j.rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(text: &str) -> Sequent {
        Sequent::parse(text).unwrap()
    }

    #[test]
    fn parse_and_display_roundtrip() {
        let s = seq("xRy, yRz | x:p, y:[]q => z:r");
        assert_eq!(s.rel.len(), 2);
        assert_eq!(s.lhs().len(), 2);
        assert_eq!(s.rhs().len(), 1);
        let shown = s.to_string();
        assert_eq!(seq(&shown), s);
    }

    #[test]
    fn empty_segments() {
        let s = seq("=> x:p");
        assert!(s.rel.is_empty());
        assert!(s.lhs().is_empty());
        let s2 = seq(" | => x:p");
        assert_eq!(s, s2);
    }

    #[test]
    fn multiset_equality_ignores_order_not_multiplicity() {
        let a = seq("x:p, x:q => x:r");
        let b = seq("x:q, x:p => x:r");
        assert_eq!(a, b);
        let c = seq("x:p, x:p => x:r");
        assert_ne!(a, c);
        let d = seq("x:p, x:p => x:r");
        assert_eq!(c, d);
    }

    #[test]
    fn renaming_defaults_to_identity() {
        let s = seq("xRy | x:p => y:q");
        let map = BTreeMap::from([(Label::new("y"), Label::new("z"))]);
        assert_eq!(s.rename(&map), seq("xRz | x:p => z:q"));
    }

    #[test]
    fn saturated_example() {
        // x:<>p with witness, box distributed: saturated.
        let s = seq("xRy | x:<>p, y:p => x:q");
        let (ok, v) = is_saturated(&s, true);
        assert!(ok, "{v:?}");
        // Remove the witness: unsaturated.
        let s = seq("xRy | x:<>p => x:q");
        let (ok, v) = is_saturated(&s, true);
        assert!(!ok);
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn saturation_requires_transitive_closure() {
        let s = seq("xRy, yRz | x:p => z:q");
        assert!(!is_saturated(&s, true).0);
        assert!(is_saturated(&s, false).0);
        let t = seq("xRy, yRz, xRz | x:p => z:q");
        assert!(is_saturated(&t, true).0);
    }

    #[test]
    fn quasi_tree_examples() {
        // Chain plus transitive edge: tree xRy, yRz supports it.
        let s = seq("xRy, yRz, xRz | x:p => z:q");
        assert!(is_quasi_tree_like(&s).is_some());
        // Pure back edge cannot be supported by any tree.
        let s = seq("xRy, yRx | x:p => y:q");
        assert!(is_quasi_tree_like(&s).is_none());
        // Empty rel with a single label.
        assert!(is_quasi_tree_like(&seq("=> x:p")).is_some());
        // Empty rel but two labels: not quasi-tree-like.
        assert!(is_quasi_tree_like(&seq("x:p => y:q")).is_none());
    }

    #[test]
    fn disjunction_canonical_order() {
        let a = DisjFormula::new(vec![
            LabelledFormula::parse("y:q").unwrap(),
            LabelledFormula::parse("x:p").unwrap(),
        ]);
        let b = DisjFormula::new(vec![
            LabelledFormula::parse("x:p").unwrap(),
            LabelledFormula::parse("y:q").unwrap(),
        ]);
        assert_eq!(a, b);
        assert_eq!(a.degree(), 2);
        let (h, t) = a.split();
        assert_eq!(h.degree(), 1);
        assert_eq!(t.degree(), 1);
    }

    #[test]
    fn sequent_json_roundtrip() {
        let s = seq("xRy | x:p & q => y:[]p");
        let js = serde_json::to_string(&s).unwrap();
        let back: Sequent = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
