//! The disjunctive single-succedent system and bounded cut-degree
//! reduction.
//!
//! A multi-succedent proof is embedded into the disjunctive system by
//! collapsing every succedent into a single disjunction of labelled
//! formulas; multi-succedent right steps are simulated by proving the
//! entailment between the old and new disjunctions and cutting against it.
//! The degree of the resulting proof (the maximal number of disjuncts in a
//! cut formula) is bounded by the maximal succedent width of the input.
//!
//! Degree reduction works on finite thinning-free unfoldings of the cyclic
//! graph: cuts of maximal degree are pushed above bars of increasing
//! height using the key reduction (via or-left inversion) and the
//! commutative reductions, and the rewritten tree is folded back into a
//! cyclic proof by companion detection.  Since the rewriting acts on
//! bounded unfoldings, `Unfinished` is an honest possible outcome; any
//! closed output is re-checked, never assumed correct.

use crate::cyclic::{
    check_progress, edge_trace_relation, CheckError, CyclicProof, NodeId, ProofNode, Renaming,
    Step, TraceRel,
};
use crate::formula::{Formula, Label};
use crate::prover::{cycle_progressing, find_renaming};
use crate::rules::{RuleName, SystemId};
use crate::sequent::{multiset_sub, DisjFormula, LabelledFormula, RelAtom, Sequent, Side};
use std::collections::{BTreeMap, BTreeSet};

/// The maximal degree of a cut formula in the proof; 0 when cut-free.
pub fn degree_of(p: &CyclicProof) -> usize {
    p.max_cut_degree()
}

fn err(node: impl Into<Option<NodeId>>, message: impl Into<String>) -> CheckError {
    CheckError {
        node: node.into(),
        message: message.into(),
    }
}

/// Collapse a succedent multiset into a single disjunction (repeated
/// disjuncts removed, canonical order).
fn collapse(s: &Sequent) -> Result<Sequent, String> {
    if s.rhs().is_empty() {
        return Err(format!("cannot collapse an empty succedent: `{s}`"));
    }
    let singles: Vec<LabelledFormula> = s
        .rhs()
        .iter()
        .flat_map(|d| d.disjuncts().iter().cloned())
        .collect();
    Ok(Sequent::new(
        s.rel.iter().cloned(),
        s.lhs().iter().cloned(),
        [DisjFormula::new(singles)],
    ))
}

fn single(lf: &LabelledFormula) -> DisjFormula {
    DisjFormula::single(lf.clone())
}

/// Node-at-a-time builder for gadget proofs; steps may be filled in after
/// allocation so that back-edges can target their companions.
struct Builder {
    nodes: Vec<(Sequent, Option<Step>)>,
}

impl Builder {
    fn new() -> Self {
        Builder { nodes: Vec::new() }
    }

    fn alloc(&mut self, sequent: Sequent) -> NodeId {
        self.nodes.push((sequent, None));
        (self.nodes.len() - 1) as NodeId
    }

    fn set(&mut self, id: NodeId, step: Step) {
        let slot = &mut self.nodes[id as usize].1;
        debug_assert!(slot.is_none());
        *slot = Some(step);
    }

    fn leaf(&mut self, sequent: Sequent, rule: RuleName) -> NodeId {
        let id = self.alloc(sequent);
        self.set(id, Step::rule(rule, vec![]));
        id
    }

    fn sequent(&self, id: NodeId) -> &Sequent {
        &self.nodes[id as usize].0
    }

    fn finish(self, system: SystemId, root: NodeId) -> CyclicProof {
        let mut proof = CyclicProof::new(system);
        proof.root = root;
        for (i, (sequent, step)) in self.nodes.into_iter().enumerate() {
            proof.nodes.insert(
                i as NodeId,
                ProofNode {
                    sequent,
                    step: step.expect("all builder nodes must be completed"),
                },
            );
        }
        proof
    }
}

/// Peel `dis-orR` steps from a sequent with succedent `[phi]` down to the
/// singleton `target`, closing the chain with `top`.
fn project(
    b: &mut Builder,
    base: &Sequent,
    target: &LabelledFormula,
    top: &mut dyn FnMut(&mut Builder, Sequent) -> Result<NodeId, String>,
) -> Result<NodeId, String> {
    let phi = base.rhs()[0].clone();
    if phi.as_single() == Some(target) {
        return top(b, base.clone());
    }
    if !phi.contains(target) {
        return Err(format!("projection target `{target}` not in `{phi}`"));
    }
    let (first, rest) = phi.split();
    let id = b.alloc(base.clone());
    let child = if first.as_single() == Some(target) {
        top(b, base.with_rhs(vec![first]))?
    } else {
        project(b, &base.with_rhs(vec![rest]), target, top)?
    };
    b.set(id, Step::rule(RuleName::DisOrR, vec![child]));
    Ok(id)
}

/// Prove `rel | ctx, psi => [phi]` by case analysis on `psi` (`dis-orL`),
/// closing each singleton case either through `special` or by projecting
/// `phi` onto a matching disjunct (directly, through `diaR`, or through
/// `orR`).
fn entail(
    b: &mut Builder,
    rel: &BTreeSet<RelAtom>,
    ctx: &[DisjFormula],
    psi: &DisjFormula,
    phi: &DisjFormula,
    special: &mut dyn FnMut(&mut Builder, &Sequent, &LabelledFormula) -> Option<Result<NodeId, String>>,
) -> Result<NodeId, String> {
    let seq = Sequent::new(
        rel.iter().cloned(),
        ctx.iter().cloned().chain([psi.clone()]),
        [phi.clone()],
    );
    if let Some(d) = psi.as_single() {
        let d = d.clone();
        if let Some(r) = special(b, &seq, &d) {
            return r;
        }
        if phi.contains(&d) {
            return project(b, &seq, &d, &mut |b, s| Ok(b.leaf(s, RuleName::Id)));
        }
        // the disjunct was added by a right diamond step: x:<>A with xRy
        for t in phi.disjuncts() {
            if let Formula::Dia(a) = &t.formula {
                if **a == d.formula && rel.contains(&(t.label.clone(), d.label.clone())) {
                    return project(b, &seq, t, &mut |b, s| {
                        let idn = b.leaf(s.with_rhs(vec![single(&d)]), RuleName::Id);
                        let n = b.alloc(s);
                        b.set(n, Step::rule(RuleName::DiaR, vec![idn]));
                        Ok(n)
                    });
                }
            }
        }
        // the disjunct was added by a right disjunction step: x:A0|A1
        for t in phi.disjuncts() {
            if let Formula::Or(a0, a1) = &t.formula {
                if t.label == d.label && (**a0 == d.formula || **a1 == d.formula) {
                    return project(b, &seq, t, &mut |b, s| {
                        let idn = b.leaf(s.with_rhs(vec![single(&d)]), RuleName::Id);
                        let n = b.alloc(s);
                        b.set(n, Step::rule(RuleName::OrR, vec![idn]));
                        Ok(n)
                    });
                }
            }
        }
        return Err(format!("no derivation of `{phi}` from disjunct `{d}`"));
    }
    let (p0, p1) = psi.split();
    let n = b.alloc(seq);
    let c0 = entail(b, rel, ctx, &p0, phi, special)?;
    let c1 = entail(b, rel, ctx, &p1, phi, special)?;
    b.set(n, Step::rule(RuleName::DisOrL, vec![c0, c1]));
    Ok(n)
}

/// A chain of `cL` steps from the pre-allocated `bottom` (sequent `c`) up
/// to `top`, which proves `c` with the multiset `dup` repeated.
fn contraction_chain(b: &mut Builder, bottom: NodeId, c: &Sequent, dup: &[DisjFormula], top: NodeId) {
    if dup.is_empty() {
        // degenerate: nothing to contract, splice through a thinning no-op
        b.set(bottom, Step::rule(RuleName::Th, vec![top]));
        return;
    }
    let mut cur = top;
    for k in (1..dup.len()).rev() {
        let mut seq = c.clone();
        for d in &dup[..k] {
            seq = seq.add_lhs(d.clone());
        }
        let n = b.alloc(seq);
        b.set(n, Step::rule(RuleName::CL, vec![cur]));
        cur = n;
    }
    b.set(bottom, Step::rule(RuleName::CL, vec![cur]));
}

/// Embed a cut-free multi-succedent proof into the disjunctive
/// single-succedent system: every succedent is collapsed into one
/// disjunction, right steps that widen the succedent are simulated by a
/// cut against a proof of the corresponding entailment, and back-edges are
/// carried over unchanged.  The cut degree of the output is bounded by the
/// maximal succedent width of the input.
pub fn embed_multisuccedent(p: &CyclicProof) -> Result<CyclicProof, CheckError> {
    if p.uses_rule(RuleName::Cut) {
        return Err(err(None, "input proof is not cut-free"));
    }
    p.check_local()?;
    let mut b = Builder::new();
    let mut image: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let root = embed_node(&mut b, p, p.root, &mut image).map_err(|m| err(None, m))?;
    let out = b.finish(SystemId::DIK4, root);
    out.check_local()?;
    check_progress(&out).map_err(|f| err(None, format!("embedding lost progress: {f}")))?;
    Ok(out)
}

fn embed_node(
    b: &mut Builder,
    p: &CyclicProof,
    id: NodeId,
    image: &mut BTreeMap<NodeId, NodeId>,
) -> Result<NodeId, String> {
    use RuleName::*;
    let node = p.node(id);
    let c = collapse(&node.sequent).map_err(|m| format!("node {id}: {m}"))?;
    let phi = c.rhs()[0].clone();
    let n = b.alloc(c.clone());
    image.insert(id, n);
    // splice: make the pre-allocated node a thinning no-op over `top`
    macro_rules! splice {
        ($top:expr) => {{
            let top = $top;
            b.set(n, Step::rule(Th, vec![top]));
            return Ok(n);
        }};
    }
    let (rule, premisses, fresh) = match &node.step {
        Step::BackEdge { target, renaming } => {
            let t = *image
                .get(target)
                .ok_or_else(|| format!("node {id}: back-edge target not yet embedded"))?;
            b.set(
                n,
                Step::BackEdge {
                    target: t,
                    renaming: renaming.clone(),
                },
            );
            return Ok(n);
        }
        Step::Rule {
            rule,
            premisses,
            fresh,
            cut_formula: _,
        } => (*rule, premisses.clone(), fresh.clone()),
    };
    // single-succedent conclusion and premisses: the step is its own image
    let all_single = node.sequent.rhs().len() == 1
        && premisses
            .iter()
            .all(|q| p.node(*q).sequent.rhs().len() == 1);
    if all_single {
        let mut children = Vec::new();
        for q in &premisses {
            children.push(embed_node(b, p, *q, image)?);
        }
        b.set(
            n,
            Step::Rule {
                rule,
                premisses: children,
                fresh,
                cut_formula: None,
            },
        );
        return Ok(n);
    }
    match rule {
        Id => {
            // project onto a succedent formula that also occurs on the left
            let witness = node
                .sequent
                .rhs()
                .iter()
                .find(|d| node.sequent.contains(crate::sequent::Side::Lhs, d))
                .and_then(|d| d.as_single().cloned())
                .ok_or_else(|| format!("node {id}: id step without a shared formula"))?;
            let top = project(b, &c, &witness, &mut |b, s| Ok(b.leaf(s, Id)))?;
            splice!(top);
        }
        BotL => {
            b.set(n, Step::rule(BotL, vec![]));
            Ok(n)
        }
        // left steps keep the succedent: re-emit over collapsed sequents
        Tr | Th | WL | CL | AndL | OrL | BoxL | DiaL | MacroAndL | MacroOrL | MacroBoxL
        | MacroDiaL => {
            let mut children = Vec::new();
            for q in &premisses {
                children.push(embed_node(b, p, *q, image)?);
            }
            b.set(
                n,
                Step::Rule {
                    rule,
                    premisses: children,
                    fresh,
                    cut_formula: None,
                },
            );
            Ok(n)
        }
        // right contraction disappears under disjunct deduplication
        CR => {
            let child = embed_node(b, p, premisses[0], image)?;
            splice!(child);
        }
        // succedent-rewriting single-premiss steps: cut against the
        // entailment between the collapsed premiss and conclusion
        WR | MacroOrR | MacroDiaR => {
            let child = embed_node(b, p, premisses[0], image)?;
            let psi = b.sequent(child).rhs()[0].clone();
            if psi == phi {
                splice!(child);
            }
            let right = entail(b, &c.rel, &[], &psi, &phi, &mut |_, _, _| None)?;
            b.set(
                n,
                Step::Rule {
                    rule: Cut,
                    premisses: vec![child, right],
                    fresh: None,
                    cut_formula: Some(psi),
                },
            );
            Ok(n)
        }
        ImpR | BoxR => {
            // the premiss replaces the whole succedent (multi-succedent
            // form); project onto the principal formula and re-apply the
            // strict right step
            let prem = &p.node(premisses[0]).sequent;
            if prem.rhs().len() != 1 {
                return Err(format!("node {id}: unsupported wide {rule} premiss"));
            }
            let prem_lf = prem.rhs()[0]
                .as_single()
                .ok_or_else(|| format!("node {id}: non-singleton {rule} premiss"))?
                .clone();
            let principal = node
                .sequent
                .rhs()
                .iter()
                .filter_map(|d| d.as_single())
                .find(|l| match (&l.formula, rule) {
                    (Formula::Imp(_, bb), ImpR) => **bb == prem_lf.formula && l.label == prem_lf.label,
                    (Formula::Box(a), BoxR) => **a == prem_lf.formula,
                    _ => false,
                })
                .cloned()
                .ok_or_else(|| format!("node {id}: no principal formula for {rule}"))?;
            let child = embed_node(b, p, premisses[0], image)?;
            let top = project(b, &c, &principal, &mut |b, s| {
                let t = b.alloc(s);
                b.set(
                    t,
                    Step::Rule {
                        rule,
                        premisses: vec![child],
                        fresh: fresh.clone(),
                        cut_formula: None,
                    },
                );
                Ok(t)
            })?;
            splice!(top);
        }
        MacroAndR => {
            // find the principal conjunction from the premiss succedents
            let psi0 = collapse(&p.node(premisses[0]).sequent)?.rhs()[0].clone();
            let psi1 = collapse(&p.node(premisses[1]).sequent)?.rhs()[0].clone();
            if psi0 == phi {
                let child = embed_node(b, p, premisses[0], image)?;
                splice!(child);
            }
            let mut found = None;
            for t in phi.disjuncts() {
                if let Formula::And(a0, a1) = &t.formula {
                    let xa = LabelledFormula::new(t.label.clone(), (**a0).clone());
                    let xb = LabelledFormula::new(t.label.clone(), (**a1).clone());
                    if psi0 == phi.union(&single(&xa)) && psi1 == phi.union(&single(&xb)) {
                        found = Some((t.clone(), xa, xb));
                        break;
                    }
                }
            }
            let (principal, xa, xb) =
                found.ok_or_else(|| format!("node {id}: no principal formula for macro-andR"))?;
            let gamma: Vec<DisjFormula> = c.lhs().to_vec();
            // inner cut against the second premiss, under context [x:A]
            let e0 = embed_node(b, p, premisses[0], image)?;
            let e1 = embed_node(b, p, premisses[1], image)?;
            let inner_ctx = [single(&xa)];
            let q1 = entail(b, &c.rel, &inner_ctx, &psi1, &phi, &mut |b, s, d| {
                if *d != xb {
                    return None;
                }
                // rel | x:A, x:B => [phi]: conclude by andR under projection
                Some(project(b, s, &principal, &mut |b, s2| {
                    let ia = b.leaf(s2.with_rhs(vec![single(&xa)]), Id);
                    let ib = b.leaf(s2.with_rhs(vec![single(&xb)]), Id);
                    let t = b.alloc(s2);
                    b.set(t, Step::rule(AndR, vec![ia, ib]));
                    Ok(t)
                }))
            })?;
            let cut1_seq = Sequent::new(
                c.rel.iter().cloned(),
                gamma.iter().cloned().chain([single(&xa)]),
                [phi.clone()],
            );
            let cut1 = b.alloc(cut1_seq);
            b.set(
                cut1,
                Step::Rule {
                    rule: Cut,
                    premisses: vec![e1, q1],
                    fresh: None,
                    cut_formula: Some(psi1),
                },
            );
            let q0 = entail(b, &c.rel, &gamma, &psi0, &phi, &mut |_, _, d| {
                if *d == xa {
                    Some(Ok(cut1))
                } else {
                    None
                }
            })?;
            let mut cut0_seq = c.clone();
            for g in &gamma {
                cut0_seq = cut0_seq.add_lhs(g.clone());
            }
            let cut0 = b.alloc(cut0_seq);
            b.set(
                cut0,
                Step::Rule {
                    rule: Cut,
                    premisses: vec![e0, q0],
                    fresh: None,
                    cut_formula: Some(psi0),
                },
            );
            contraction_chain(b, n, &c, &gamma, cut0);
            Ok(n)
        }
        MacroImpL => {
            // multi-succedent form: first premiss adds x:A on the right,
            // second adds x:B on the left
            let psi1 = collapse(&p.node(premisses[0]).sequent)?.rhs()[0].clone();
            if psi1 == phi {
                let child = embed_node(b, p, premisses[0], image)?;
                splice!(child);
            }
            let mut found = None;
            for d in node.sequent.lhs() {
                let Some(l) = d.as_single() else { continue };
                let Formula::Imp(a0, a1) = &l.formula else {
                    continue;
                };
                let xa = LabelledFormula::new(l.label.clone(), (**a0).clone());
                let xb = LabelledFormula::new(l.label.clone(), (**a1).clone());
                if psi1 == phi.union(&single(&xa)) {
                    found = Some((l.clone(), xa, xb));
                    break;
                }
            }
            let (principal, xa, xb) =
                found.ok_or_else(|| format!("node {id}: no principal formula for macro-impL"))?;
            let gamma: Vec<DisjFormula> = c.lhs().to_vec();
            let e1 = embed_node(b, p, premisses[0], image)?;
            // the case analysis reaching x:A re-derives x:B by impL against
            // a duplicated copy of the implication and continues with the
            // embedded second premiss
            let mut e2_cache: Option<NodeId> = None;
            let mut e2_err: Option<String> = None;
            let q = entail(b, &c.rel, &gamma, &psi1, &phi, &mut |b, s, d| {
                if *d != xa {
                    return None;
                }
                let e2 = match e2_cache {
                    Some(e) => e,
                    None => match embed_node(b, p, premisses[1], image) {
                        Ok(e) => {
                            e2_cache = Some(e);
                            e
                        }
                        Err(m) => {
                            e2_err = Some(m.clone());
                            return Some(Err(m));
                        }
                    },
                };
                debug_assert_eq!(
                    b.sequent(e2).rhs(),
                    std::slice::from_ref(&phi),
                    "embedded second premiss succedent"
                );
                let s2 = s.add_lhs(single(&principal));
                let ia = b.leaf(
                    Sequent::new(c.rel.iter().cloned(), [single(&xa)], [single(&xa)]),
                    Id,
                );
                let impl_node = b.alloc(s2);
                b.set(impl_node, Step::rule(ImpL, vec![ia, e2]));
                let cl_node = b.alloc(s.clone());
                b.set(cl_node, Step::rule(CL, vec![impl_node]));
                let _ = xb;
                Some(Ok(cl_node))
            })?;
            let mut cut_seq = c.clone();
            for g in &gamma {
                cut_seq = cut_seq.add_lhs(g.clone());
            }
            let cut = b.alloc(cut_seq);
            b.set(
                cut,
                Step::Rule {
                    rule: Cut,
                    premisses: vec![e1, q],
                    fresh: None,
                    cut_formula: Some(psi1),
                },
            );
            contraction_chain(b, n, &c, &gamma, cut);
            Ok(n)
        }
        other => Err(format!(
            "node {id}: rule {other} has no multi-succedent embedding"
        )),
    }
}

// --- finite tree proofs and thinning-free unfolding ---

/// One step of a finite tree proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeStep {
    Rule {
        rule: RuleName,
        children: Vec<usize>,
        fresh: Option<Label>,
        cut_formula: Option<DisjFormula>,
    },
    /// An unexpanded frontier leaf of a bounded unfolding.
    Open,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub sequent: Sequent,
    pub step: TreeStep,
}

/// A finite (possibly open) tree proof used as the rewriting arena for cut
/// reduction.  Rewrites allocate fresh nodes; unreferenced nodes linger
/// unused, so all traversals go through `reachable` from the root.
#[derive(Clone, Debug)]
pub struct TreeProof {
    pub system: SystemId,
    pub root: usize,
    pub nodes: Vec<TreeNode>,
}

impl TreeProof {
    pub fn conclusion(&self) -> &Sequent {
        &self.nodes[self.root].sequent
    }

    pub fn children(&self, n: usize) -> &[usize] {
        match &self.nodes[n].step {
            TreeStep::Rule { children, .. } => children,
            TreeStep::Open => &[],
        }
    }

    /// All node indices reachable from the root, in depth-first order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            out.push(n);
            for c in self.children(n).iter().rev() {
                stack.push(*c);
            }
        }
        out
    }

    pub fn open_leaves(&self) -> usize {
        self.reachable()
            .into_iter()
            .filter(|n| matches!(self.nodes[*n].step, TreeStep::Open))
            .count()
    }

    /// Maximal cut-formula degree among reachable nodes; 0 when cut-free.
    pub fn degree(&self) -> usize {
        self.reachable()
            .into_iter()
            .filter_map(|n| match &self.nodes[n].step {
                TreeStep::Rule {
                    cut_formula: Some(f),
                    ..
                } => Some(f.degree()),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

/// Steps that do not count towards logical height: structural steps,
/// initial sequents, and disjunction re-bracketing on the right.
fn administrative(r: RuleName) -> bool {
    use RuleName::*;
    matches!(r, WL | WR | CL | CR | Th | Id | BotL | DisOrR)
}

/// Unfold a cyclic proof into a finite tree up to `max_height` logical
/// steps per branch, splicing out `th` steps (dropped relational atoms are
/// kept in every sequent above) and following back-edges through their
/// renamings.  Fresh labels are regenerated per copy, so distinct unfolded
/// copies never clash.  Exceeding `node_cap` truncates branches to `Open`.
pub fn th_free_unfold(p: &CyclicProof, max_height: usize, node_cap: usize) -> TreeProof {
    struct Unfolder<'a> {
        p: &'a CyclicProof,
        nodes: Vec<TreeNode>,
        counter: usize,
        max_height: usize,
        node_cap: usize,
    }
    impl Unfolder<'_> {
        fn fresh(&mut self) -> Label {
            let l = Label(format!("u{}", self.counter));
            self.counter += 1;
            l
        }

        fn apply(&self, gid: NodeId, sigma: &Renaming, extra: &BTreeSet<RelAtom>) -> Sequent {
            let mut s = self.p.node(gid).sequent.rename(sigma);
            for a in extra {
                if !s.rel.contains(a) {
                    s = s.add_rel(a.clone());
                }
            }
            s
        }

        fn go(
            &mut self,
            gid: NodeId,
            sigma: Renaming,
            extra: BTreeSet<RelAtom>,
            depth: usize,
        ) -> usize {
            let seq = self.apply(gid, &sigma, &extra);
            if depth >= self.max_height || self.nodes.len() >= self.node_cap {
                self.nodes.push(TreeNode {
                    sequent: seq,
                    step: TreeStep::Open,
                });
                return self.nodes.len() - 1;
            }
            match &self.p.node(gid).step {
                Step::BackEdge { target, renaming } => {
                    // continue the unfolding at the companion, composing
                    // the back-edge renaming into the substitution
                    let tseq = &self.p.node(*target).sequent;
                    let mut sigma2 = Renaming::new();
                    for l in tseq.labels() {
                        let m = renaming.get(&l).unwrap_or(&l);
                        let v = sigma.get(m).cloned().unwrap_or_else(|| m.clone());
                        sigma2.insert(l.clone(), v);
                    }
                    self.go(*target, sigma2, extra, depth)
                }
                Step::Rule {
                    rule: RuleName::Th,
                    premisses,
                    ..
                } => {
                    // splice: everything above keeps the dropped atoms
                    let extra2 = seq.rel.clone();
                    self.go(premisses[0], sigma, extra2, depth)
                }
                Step::Rule {
                    rule,
                    premisses,
                    fresh,
                    cut_formula,
                } => {
                    let rule = *rule;
                    let premisses = premisses.clone();
                    let (fresh2, sigma2) = match fresh {
                        Some(y) => {
                            let z = self.fresh();
                            let mut s2 = sigma.clone();
                            s2.insert(y.clone(), z.clone());
                            (Some(z), s2)
                        }
                        None => (None, sigma.clone()),
                    };
                    let cut2 = cut_formula.as_ref().map(|f| f.rename(&sigma));
                    let depth2 = depth + usize::from(!administrative(rule));
                    let children: Vec<usize> = premisses
                        .iter()
                        .map(|q| self.go(*q, sigma2.clone(), extra.clone(), depth2))
                        .collect();
                    self.nodes.push(TreeNode {
                        sequent: seq,
                        step: TreeStep::Rule {
                            rule,
                            children,
                            fresh: fresh2,
                            cut_formula: cut2,
                        },
                    });
                    self.nodes.len() - 1
                }
            }
        }
    }
    let mut u = Unfolder {
        p,
        nodes: Vec::new(),
        counter: 0,
        max_height,
        node_cap,
    };
    // seed the fresh counter past any label already used in the proof
    let used: BTreeSet<Label> = p
        .nodes
        .values()
        .flat_map(|n| n.sequent.labels())
        .collect();
    while used.contains(&Label(format!("u{}", u.counter))) {
        u.counter += 1;
    }
    let root = u.go(p.root, Renaming::new(), BTreeSet::new(), 0);
    TreeProof {
        system: p.system,
        root,
        nodes: u.nodes,
    }
}

/// The set of positions at logical depth `height` (an antichain); finite
/// branches shorter than the height contribute their leaf.
pub fn compute_bar(t: &TreeProof, height: usize) -> BTreeSet<usize> {
    fn go(t: &TreeProof, n: usize, h: usize, bar: &mut BTreeSet<usize>) {
        if h == 0 {
            bar.insert(n);
            return;
        }
        let TreeStep::Rule { rule, children, .. } = &t.nodes[n].step else {
            bar.insert(n);
            return;
        };
        if children.is_empty() {
            bar.insert(n);
            return;
        }
        let h2 = h - usize::from(!administrative(*rule));
        for c in children {
            go(t, *c, h2, bar);
        }
    }
    let mut bar = BTreeSet::new();
    go(t, t.root, height, &mut bar);
    bar
}

fn count_lhs(s: &Sequent, phi: &DisjFormula) -> usize {
    s.lhs().iter().filter(|d| *d == phi).count()
}

fn swap_lhs(s: &Sequent, phi: &DisjFormula, phi_i: &DisjFormula, k: usize) -> Sequent {
    if k == 0 {
        return s.clone();
    }
    let mut lhs: Vec<DisjFormula> = s.lhs().to_vec();
    let mut removed = 0;
    lhs.retain(|d| {
        if removed < k && d == phi {
            removed += 1;
            false
        } else {
            true
        }
    });
    assert_eq!(removed, k, "tracked occurrences must exist");
    lhs.extend(std::iter::repeat_n(phi_i.clone(), k));
    Sequent::new(s.rel.iter().cloned(), lhs, s.rhs().iter().cloned())
}

/// Or-left inversion: replace `k0` tracked occurrences of the disjunction
/// `phi` in the antecedent of the subtree at `q` (and all their direct
/// ancestors) by the `i`-th half of its split, taking the `i`-premiss at
/// principal `dis-orL` steps.  Returns the new subtree root; `dups`
/// records old-to-new node correspondences for bar transport.
fn invert_or_left_tracked(
    t: &mut TreeProof,
    q: usize,
    phi: &DisjFormula,
    i: usize,
    k0: usize,
    dups: &mut Vec<(usize, usize)>,
) -> Result<usize, String> {
    use RuleName::*;
    let (s0, s1) = phi.split();
    let phi_i = if i == 0 { s0.clone() } else { s1.clone() };
    fn go(
        t: &mut TreeProof,
        n: usize,
        k: usize,
        phi: &DisjFormula,
        phi_i: &DisjFormula,
        i: usize,
        dups: &mut Vec<(usize, usize)>,
    ) -> Result<usize, String> {
        if k == 0 {
            return Ok(n);
        }
        let node = t.nodes[n].clone();
        let ns = swap_lhs(&node.sequent, phi, phi_i, k);
        let TreeStep::Rule {
            rule,
            children,
            fresh,
            cut_formula,
        } = node.step
        else {
            t.nodes.push(TreeNode {
                sequent: ns,
                step: TreeStep::Open,
            });
            dups.push((n, t.nodes.len() - 1));
            return Ok(t.nodes.len() - 1);
        };
        // principal dis-orL on a tracked copy: take the i-premiss
        if rule == DisOrL {
            let want = {
                let mut lhs: Vec<DisjFormula> = node.sequent.lhs().to_vec();
                if let Some(pos) = lhs.iter().position(|d| d == phi) {
                    lhs.remove(pos);
                    lhs.push(if i == 0 { phi.split().0 } else { phi.split().1 });
                    Some(Sequent::new(
                        node.sequent.rel.iter().cloned(),
                        lhs,
                        node.sequent.rhs().iter().cloned(),
                    ))
                } else {
                    None
                }
            };
            if let Some(want) = want {
                if t.nodes[children[i]].sequent == want {
                    return go(t, children[i], k - 1, phi, phi_i, i, dups);
                }
            }
        }
        // distribute the tracked count over the premisses
        let kids: Vec<(usize, usize)> = match rule {
            CL => {
                let prem = &t.nodes[children[0]].sequent;
                let dup = multiset_sub(prem.lhs(), node.sequent.lhs())
                    .and_then(|v| v.into_iter().next());
                let k2 = if dup.as_ref() == Some(phi) { k + 1 } else { k };
                vec![(children[0], k2)]
            }
            WL => {
                let prem = &t.nodes[children[0]].sequent;
                vec![(children[0], k.min(count_lhs(prem, phi)))]
            }
            Cut => {
                let chi = cut_formula.clone().ok_or("cut without cut formula")?;
                let a = &t.nodes[children[0]].sequent;
                let bseq = &t.nodes[children[1]].sequent;
                let pool_b = count_lhs(bseq, phi) - usize::from(chi == *phi);
                let ka = k.min(count_lhs(a, phi));
                let kb = k - ka;
                if kb > pool_b {
                    return Err("or-left inversion: tracked copies lost at a cut".into());
                }
                vec![(children[0], ka), (children[1], kb)]
            }
            ImpL => {
                let p1 = &t.nodes[children[0]].sequent;
                let k1 = k.min(count_lhs(p1, phi));
                vec![(children[0], k1), (children[1], k - k1)]
            }
            _ => children.iter().map(|c| (*c, k)).collect(),
        };
        // a closed leaf whose identity formula was tracked away needs a
        // dis-orR step back onto the replaced half
        if rule == Id && !ns.rhs().is_empty() {
            let delta = &ns.rhs()[0];
            if delta == phi && !ns.lhs().contains(delta) {
                let leaf_seq = ns.with_rhs(vec![phi_i.clone()]);
                t.nodes.push(TreeNode {
                    sequent: leaf_seq,
                    step: TreeStep::Rule {
                        rule: Id,
                        children: vec![],
                        fresh: None,
                        cut_formula: None,
                    },
                });
                let leaf = t.nodes.len() - 1;
                t.nodes.push(TreeNode {
                    sequent: ns,
                    step: TreeStep::Rule {
                        rule: DisOrR,
                        children: vec![leaf],
                        fresh: None,
                        cut_formula: None,
                    },
                });
                dups.push((n, t.nodes.len() - 1));
                return Ok(t.nodes.len() - 1);
            }
        }
        let mut new_children = Vec::new();
        for (c, kc) in kids {
            new_children.push(go(t, c, kc, phi, phi_i, i, dups)?);
        }
        t.nodes.push(TreeNode {
            sequent: ns,
            step: TreeStep::Rule {
                rule,
                children: new_children,
                fresh,
                cut_formula,
            },
        });
        dups.push((n, t.nodes.len() - 1));
        Ok(t.nodes.len() - 1)
    }
    go(t, q, k0, phi, &phi_i, i, dups)
}

/// Or-left inversion of the subtree at `node`, whose conclusion must carry
/// one occurrence of `phi` in its antecedent.
pub fn invert_or_left(
    t: &mut TreeProof,
    node: usize,
    phi: &DisjFormula,
    i: usize,
) -> Result<usize, String> {
    if count_lhs(&t.nodes[node].sequent, phi) == 0 {
        return Err(format!("`{phi}` does not occur in the antecedent"));
    }
    let mut dups = Vec::new();
    invert_or_left_tracked(t, node, phi, i, 1, &mut dups)
}

fn clone_subtree(t: &mut TreeProof, n: usize, dups: &mut Vec<(usize, usize)>) -> usize {
    let node = t.nodes[n].clone();
    let step = match node.step {
        TreeStep::Open => TreeStep::Open,
        TreeStep::Rule {
            rule,
            children,
            fresh,
            cut_formula,
        } => {
            let children = children
                .iter()
                .map(|c| clone_subtree(t, *c, dups))
                .collect();
            TreeStep::Rule {
                rule,
                children,
                fresh,
                cut_formula,
            }
        }
    };
    t.nodes.push(TreeNode {
        sequent: node.sequent,
        step,
    });
    dups.push((n, t.nodes.len() - 1));
    t.nodes.len() - 1
}

/// Prepend relational atoms to every sequent of the subtree at `n`.
fn add_rel_subtree(t: &mut TreeProof, n: usize, atoms: &[RelAtom]) {
    let mut s = t.nodes[n].sequent.clone();
    for a in atoms {
        if !s.rel.contains(a) {
            s = s.add_rel(a.clone());
        }
    }
    t.nodes[n].sequent = s;
    for c in t.children(n).to_vec() {
        add_rel_subtree(t, c, atoms);
    }
}

/// A chain of `wL` steps proving `base + extras` from the subtree at `top`
/// (which proves `base`); returns the bottom node.
fn weaken_left_chain(t: &mut TreeProof, top: usize, extras: &[DisjFormula]) -> usize {
    let mut cur = top;
    let mut seq = t.nodes[top].sequent.clone();
    for e in extras {
        seq = seq.add_lhs(e.clone());
        t.nodes.push(TreeNode {
            sequent: seq.clone(),
            step: TreeStep::Rule {
                rule: RuleName::WL,
                children: vec![cur],
                fresh: None,
                cut_formula: None,
            },
        });
        cur = t.nodes.len() - 1;
    }
    cur
}

/// Apply one cut reduction at `cut` (a cut node): the key case when the
/// left premiss ends in `dis-orR`, splicing for initial left premisses,
/// and the commutation cases for left rules and nested cuts.  The
/// conclusion sequent is unchanged.  `dups` records node duplications for
/// bar transport.
fn reduce_cut_at(
    t: &mut TreeProof,
    cut: usize,
    dups: &mut Vec<(usize, usize)>,
) -> Result<(), String> {
    use RuleName::*;
    let TreeStep::Rule {
        rule: Cut,
        children,
        cut_formula,
        ..
    } = t.nodes[cut].step.clone()
    else {
        return Err(format!("node {cut} is not a cut"));
    };
    let [l, q] = children[..] else {
        return Err("cut arity".into());
    };
    let psi = cut_formula.ok_or("cut without cut formula annotation")?;
    let conc = t.nodes[cut].sequent.clone();
    let lseq = t.nodes[l].sequent.clone();
    let qseq = t.nodes[q].sequent.clone();
    let gamma_b = multiset_sub(qseq.lhs(), std::slice::from_ref(&psi))
        .ok_or("cut formula missing from the right premiss")?;
    let TreeStep::Rule {
        rule: lr,
        children: lc,
        fresh: lfresh,
        cut_formula: lcut,
    } = t.nodes[l].step.clone()
    else {
        return Err("left premiss of the cut is an open leaf".into());
    };
    let mk_cut = |t: &mut TreeProof, left: usize, right: usize, f: &DisjFormula| -> usize {
        let ls = &t.nodes[left].sequent;
        let rs = &t.nodes[right].sequent;
        let lhs: Vec<DisjFormula> = ls
            .lhs()
            .iter()
            .cloned()
            .chain(
                multiset_sub(rs.lhs(), std::slice::from_ref(f))
                    .expect("cut formula in right premiss"),
            )
            .collect();
        let seq = Sequent::new(ls.rel.iter().cloned(), lhs, rs.rhs().iter().cloned());
        t.nodes.push(TreeNode {
            sequent: seq,
            step: TreeStep::Rule {
                rule: Cut,
                children: vec![left, right],
                fresh: None,
                cut_formula: Some(f.clone()),
            },
        });
        t.nodes.len() - 1
    };
    match lr {
        // key case: reduce the cut to one half of the split
        DisOrR => {
            let (s0, s1) = psi.split();
            let child_rhs = &t.nodes[lc[0]].sequent.rhs()[0];
            let (i, psi_i) = if *child_rhs == s0 { (0, s0) } else { (1, s1) };
            let q2 = invert_or_left_tracked(t, q, &psi, i, 1, dups)?;
            t.nodes[cut].step = TreeStep::Rule {
                rule: Cut,
                children: vec![lc[0], q2],
                fresh: None,
                cut_formula: Some(psi_i),
            };
        }
        // initial left premiss: the cut disappears
        Id => {
            let extras = multiset_sub(lseq.lhs(), std::slice::from_ref(&psi))
                .ok_or("id left premiss without the cut formula")?;
            if extras.is_empty() {
                t.nodes[cut] = t.nodes[q].clone();
                dups.push((q, cut));
            } else {
                let bottom = weaken_left_chain(t, q, &extras);
                debug_assert_eq!(t.nodes[bottom].sequent, conc);
                t.nodes[cut] = t.nodes[bottom].clone();
            }
        }
        BotL => {
            t.nodes[cut].step = TreeStep::Rule {
                rule: BotL,
                children: vec![],
                fresh: None,
                cut_formula: None,
            };
        }
        // single-premiss left commutations (the premiss may extend the
        // relational context: tr, diaL and macro-diaL)
        WL | CL | AndL | BoxL | MacroAndL | MacroBoxL | Tr | DiaL | MacroDiaL => {
            let l1 = lc[0];
            let added: Vec<RelAtom> = t.nodes[l1]
                .sequent
                .rel
                .difference(&lseq.rel)
                .cloned()
                .collect();
            if !added.is_empty() {
                add_rel_subtree(t, q, &added);
            }
            let c1 = mk_cut(t, l1, q, &psi);
            t.nodes[cut].step = TreeStep::Rule {
                rule: lr,
                children: vec![c1],
                fresh: lfresh,
                cut_formula: lcut,
            };
        }
        // branching left commutations duplicate the right premiss
        OrL | MacroOrL | DisOrL => {
            let qb = clone_subtree(t, q, dups);
            let c1 = mk_cut(t, lc[0], q, &psi);
            let c2 = mk_cut(t, lc[1], qb, &psi);
            t.nodes[cut].step = TreeStep::Rule {
                rule: lr,
                children: vec![c1, c2],
                fresh: lfresh,
                cut_formula: lcut,
            };
        }
        // implication left: the cut moves over the second premiss only
        ImpL => {
            let c2 = mk_cut(t, lc[1], q, &psi);
            t.nodes[cut].step = TreeStep::Rule {
                rule: ImpL,
                children: vec![lc[0], c2],
                fresh: None,
                cut_formula: None,
            };
        }
        MacroImpL => {
            // the first premiss keeps the whole antecedent: weaken it by
            // the right premiss context
            let w1 = weaken_left_chain(t, lc[0], &gamma_b);
            let c2 = mk_cut(t, lc[1], q, &psi);
            t.nodes[cut].step = TreeStep::Rule {
                rule: MacroImpL,
                children: vec![w1, c2],
                fresh: None,
                cut_formula: None,
            };
        }
        // nested cut: reassociate so the maximal-degree cut moves up
        Cut => {
            let chi = lcut.ok_or("nested cut without cut formula")?;
            let inner = mk_cut(t, lc[1], q, &psi);
            t.nodes[cut].step = TreeStep::Rule {
                rule: Cut,
                children: vec![lc[0], inner],
                fresh: None,
                cut_formula: Some(chi),
            };
        }
        other => {
            return Err(format!(
                "no reduction for a cut whose left premiss ends in {other}"
            ));
        }
    }
    if t.nodes[cut].sequent != conc {
        return Err("cut reduction changed the conclusion".into());
    }
    Ok(())
}

/// Apply one cut reduction at `cut`; the conclusion sequent is preserved.
pub fn reduce_cut_step(t: &mut TreeProof, cut: usize) -> Result<(), String> {
    let mut dups = Vec::new();
    reduce_cut_at(t, cut, &mut dups)
}

/// Push every cut of degree ≥ `d` strictly below the bar above it,
/// repeatedly reducing the topmost such cut (minimal distance to the bar,
/// leftmost among ties).  The bar is transported across each step and the
/// trace-preservation invariant — every transported position's relational
/// context contains some original position's — is asserted after every
/// step.  Returns the number of reductions performed.
pub fn push_cuts_above_bar(
    t: &mut TreeProof,
    bar: &mut BTreeSet<usize>,
    d: usize,
    step_cap: usize,
) -> Result<usize, String> {
    let original_rels: Vec<BTreeSet<RelAtom>> =
        bar.iter().map(|b| t.nodes[*b].sequent.rel.clone()).collect();
    let mut steps = 0;
    loop {
        // nodes strictly below the bar, with their distance to it
        let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
        fn scan(
            t: &TreeProof,
            n: usize,
            bar: &BTreeSet<usize>,
            dist: &mut BTreeMap<usize, usize>,
        ) -> Option<usize> {
            if bar.contains(&n) {
                return Some(0);
            }
            let mut best: Option<usize> = None;
            for c in t.children(n) {
                if let Some(dc) = scan(t, *c, bar, dist) {
                    best = Some(best.map_or(dc + 1, |b: usize| b.min(dc + 1)));
                }
            }
            if let Some(b) = best {
                dist.insert(n, b);
            }
            best
        }
        scan(t, t.root, bar, &mut dist);
        // candidate: minimal distance, then first in depth-first order
        let mut cand: Option<(usize, usize)> = None;
        for n in t.reachable() {
            let Some(dn) = dist.get(&n) else { continue };
            if let TreeStep::Rule {
                rule: RuleName::Cut,
                cut_formula: Some(f),
                ..
            } = &t.nodes[n].step
            {
                if f.degree() >= d && cand.is_none_or(|(bd, _)| *dn < bd) {
                    cand = Some((*dn, n));
                }
            }
        }
        let Some((_, cut)) = cand else {
            return Ok(steps);
        };
        if steps >= step_cap {
            return Err(format!("cut-pushing step cap ({step_cap}) exhausted"));
        }
        let mut dups = Vec::new();
        reduce_cut_at(t, cut, &mut dups)?;
        for (old, new) in dups {
            if bar.contains(&old) {
                bar.insert(new);
            }
        }
        let reach: BTreeSet<usize> = t.reachable().into_iter().collect();
        bar.retain(|b| reach.contains(b));
        for b in bar.iter() {
            let rel = &t.nodes[*b].sequent.rel;
            if !original_rels.is_empty() && !original_rels.iter().any(|r| r.is_subset(rel)) {
                return Err("bar transport lost relational context".into());
            }
        }
        steps += 1;
    }
}

/// Fold a finite tree proof back into a cyclic proof, closing branches by
/// progressing back-edges to subsuming ancestors (through `th`/`wL`
/// chains) where possible.  Fails if an open leaf cannot be closed.
pub fn refold(t: &TreeProof) -> Result<CyclicProof, String> {
    struct Entry {
        id: NodeId,
        sequent: Sequent,
        rel_from_parent: TraceRel,
    }
    struct Folder<'a> {
        t: &'a TreeProof,
        b: Builder,
    }
    impl Folder<'_> {
        fn fold(
            &mut self,
            n: usize,
            rel_from_parent: TraceRel,
            path: &mut Vec<Entry>,
        ) -> Result<NodeId, String> {
            let s = self.t.nodes[n].sequent.clone();
            // companion detection, innermost ancestors first
            for k in (0..path.len()).rev() {
                let Some(renaming) = find_renaming(&path[k].sequent, &s, true) else {
                    continue;
                };
                let mut cycle: Option<TraceRel> = None;
                for e in &path[k + 1..] {
                    cycle = Some(match cycle {
                        None => e.rel_from_parent.clone(),
                        Some(acc) => crate::cyclic::compose(&acc, &e.rel_from_parent),
                    });
                }
                let into_here = match &cycle {
                    None => rel_from_parent.clone(),
                    Some(acc) => crate::cyclic::compose(acc, &rel_from_parent),
                };
                let back = crate::cyclic::back_edge_trace_relation(
                    &s,
                    &path[k].sequent,
                    &renaming,
                );
                let full = crate::cyclic::compose(&into_here, &back);
                if !cycle_progressing(&full) {
                    continue;
                }
                // weakening chain from `s` down to the renamed companion
                let target = path[k].sequent.rename(&renaming);
                let extra_l = multiset_sub(s.lhs(), target.lhs()).expect("left subsumption");
                let extra_r = multiset_sub(s.rhs(), target.rhs()).expect("right subsumption");
                if !extra_r.is_empty() {
                    // widening the succedent would break the
                    // single-succedent shape; skip this companion
                    continue;
                }
                let back_id = self.b.alloc(target.clone());
                self.b.set(
                    back_id,
                    Step::BackEdge {
                        target: path[k].id,
                        renaming,
                    },
                );
                let mut cur = back_id;
                let mut seq = target;
                for e in extra_l.iter().rev() {
                    seq = seq.add_lhs(e.clone());
                    let w = self.b.alloc(seq.clone());
                    self.b.set(w, Step::rule(RuleName::WL, vec![cur]));
                    cur = w;
                }
                if seq.rel != s.rel {
                    let thn = self.b.alloc(s.clone());
                    self.b.set(thn, Step::rule(RuleName::Th, vec![cur]));
                    cur = thn;
                }
                debug_assert_eq!(self.b.sequent(cur), &s);
                return Ok(cur);
            }
            let TreeStep::Rule {
                rule,
                children,
                fresh,
                cut_formula,
            } = self.t.nodes[n].step.clone()
            else {
                return Err(format!("open leaf `{s}` could not be folded"));
            };
            let id = self.b.alloc(s.clone());
            path.push(Entry {
                id,
                sequent: s.clone(),
                rel_from_parent,
            });
            let mut kids = Vec::new();
            let mut res = Ok(());
            for c in &children {
                let edge = edge_trace_relation(&s, &self.t.nodes[*c].sequent);
                match self.fold(*c, edge, path) {
                    Ok(cid) => kids.push(cid),
                    Err(e) => {
                        res = Err(e);
                        break;
                    }
                }
            }
            path.pop();
            res?;
            self.b.set(
                id,
                Step::Rule {
                    rule,
                    premisses: kids,
                    fresh,
                    cut_formula,
                },
            );
            Ok(id)
        }
    }
    let mut f = Folder {
        t,
        b: Builder::new(),
    };
    let mut path = Vec::new();
    let root = f.fold(t.root, TraceRel::new(), &mut path)?;
    Ok(f.b.finish(t.system, root))
}

/// The result of bounded degree reduction.
#[derive(Clone, Debug)]
pub enum DegreeReduceOutcome {
    /// A closed cyclic proof of degree ≤ 1 with the same conclusion,
    /// verified by the local and progress checkers.
    Done(CyclicProof),
    /// The bounded rewriting did not close back up; the partial tree is
    /// returned as-is.
    Unfinished { reason: String, partial: TreeProof },
}

/// Reduce the cut degree of a regular proof to ≤ 1 by repeatedly
/// unfolding, pushing maximal-degree cuts above bars of heights
/// 1…`max_height`, and folding the rewritten tree back into a cyclic
/// proof.  Every closed output is re-checked (locally, for progress, and
/// for its degree); failure to close or to verify yields `Unfinished`.
pub fn degree_reduce_bounded(p: &CyclicProof, max_height: usize) -> DegreeReduceOutcome {
    let mut cur = p.clone();
    for _round in 0..8 {
        let d = degree_of(&cur);
        if d <= 1 {
            return DegreeReduceOutcome::Done(cur);
        }
        let mut t = th_free_unfold(&cur, max_height + 16, 100_000);
        for h in 1..=max_height {
            let mut bar = compute_bar(&t, h);
            if let Err(reason) = push_cuts_above_bar(&mut t, &mut bar, d, 20_000) {
                return DegreeReduceOutcome::Unfinished { reason, partial: t };
            }
        }
        let folded = match refold(&t) {
            Ok(f) => f,
            Err(reason) => return DegreeReduceOutcome::Unfinished { reason, partial: t },
        };
        if degree_of(&folded) >= d {
            return DegreeReduceOutcome::Unfinished {
                reason: format!(
                    "folded proof still has degree {} (was {d})",
                    degree_of(&folded)
                ),
                partial: t,
            };
        }
        if let Err(e) = folded.check_local() {
            return DegreeReduceOutcome::Unfinished {
                reason: format!("folded proof fails local checking: {e}"),
                partial: t,
            };
        }
        if let Err(f) = check_progress(&folded) {
            return DegreeReduceOutcome::Unfinished {
                reason: format!("folded proof fails the progress condition: {f}"),
                partial: t,
            };
        }
        cur = folded;
    }
    DegreeReduceOutcome::Unfinished {
        reason: "degree did not reach 1 within the round limit".into(),
        partial: th_free_unfold(&cur, max_height, 100_000),
    }
}

/// Rewrite a disjunctive-system proof whose sequents contain only plain
/// labelled formulas (degree ≤ 1) into the single-succedent system by
/// unfolding each generalized identity leaf `Γ, x:A ⇒ x:A` into a genuine
/// identity derivation ending in atomic `id` or `botL`.
pub fn to_single_succedent(p: &CyclicProof) -> Result<CyclicProof, CheckError> {
    if p.max_degree() > 1 {
        return Err(err(
            None,
            format!("proof has degree-{} disjunctions", p.max_degree()),
        ));
    }
    let mut out = p.clone();
    out.system = SystemId::IK4;
    let ids: Vec<NodeId> = out.nodes.keys().cloned().collect();
    for id in ids {
        let node = &out.nodes[&id];
        let is_id = matches!(
            &node.step,
            Step::Rule {
                rule: RuleName::Id,
                ..
            }
        );
        if !is_id {
            continue;
        }
        let s = node.sequent.clone();
        let Some(goal) = s.rhs().first().and_then(|d| d.as_single()).cloned() else {
            return Err(err(id, "identity leaf without a single succedent"));
        };
        if matches!(goal.formula, Formula::Atom(_)) {
            continue; // already an atomic identity
        }
        expand_identity(&mut out, id, &s, &goal)?;
    }
    out.check_local()?;
    Ok(out)
}

/// Give node `id` (with sequent `s = Γ, x:A ⇒ x:A`) a derivation by
/// structural recursion on `A`, pushing premiss nodes onto `p`.
fn expand_identity(
    p: &mut CyclicProof,
    id: NodeId,
    s: &Sequent,
    goal: &LabelledFormula,
) -> Result<(), CheckError> {
    let x = &goal.label;
    // allocate a premiss with a placeholder step, to be derived recursively
    let leaf = |p: &mut CyclicProof, s: Sequent| p.push(s, Step::rule(RuleName::Id, vec![]));
    let sub = |f: &Formula| LabelledFormula {
        label: x.clone(),
        formula: f.clone(),
    };
    let step = match &goal.formula {
        Formula::Atom(_) => Step::rule(RuleName::Id, vec![]),
        Formula::Bottom => Step::rule(RuleName::BotL, vec![]),
        Formula::And(a, b) => {
            // andR splits the goal; each branch picks its conjunct by andL
            let half = |p: &mut CyclicProof, part: &Formula| {
                let upper = s
                    .remove_one(Side::Lhs, &single(goal))
                    .expect("goal occurs on the left")
                    .with_rhs(vec![single(&sub(part))])
                    .add_lhs(single(&sub(part)));
                let top = leaf(p, upper.clone());
                expand_identity(p, top, &upper, &sub(part))?;
                let mid = s.with_rhs(vec![single(&sub(part))]);
                Ok::<NodeId, CheckError>(p.push(mid, Step::rule(RuleName::AndL, vec![top])))
            };
            let left = half(p, a)?;
            let right = half(p, b)?;
            Step::rule(RuleName::AndR, vec![left, right])
        }
        Formula::Or(a, b) => {
            // orL splits the hypothesis; each branch picks its disjunct by orR
            let half = |p: &mut CyclicProof, part: &Formula| {
                let upper = s
                    .remove_one(Side::Lhs, &single(goal))
                    .expect("goal occurs on the left")
                    .add_lhs(single(&sub(part)))
                    .with_rhs(vec![single(&sub(part))]);
                let top = leaf(p, upper.clone());
                expand_identity(p, top, &upper, &sub(part))?;
                let mid = upper.with_rhs(vec![single(goal)]);
                Ok::<NodeId, CheckError>(p.push(mid, Step::rule(RuleName::OrR, vec![top])))
            };
            let left = half(p, a)?;
            let right = half(p, b)?;
            Step::rule(RuleName::OrL, vec![left, right])
        }
        Formula::Imp(a, b) => {
            // impR moves x:A inside, then impL consumes the hypothesis
            let rest = s
                .remove_one(Side::Lhs, &single(goal))
                .expect("goal occurs on the left")
                .add_lhs(single(&sub(a)));
            let p1seq = rest.with_rhs(vec![single(&sub(a))]);
            let p1 = leaf(p, p1seq.clone());
            expand_identity(p, p1, &p1seq, &sub(a))?;
            let p2seq = Sequent::new(
                s.rel.iter().cloned(),
                [single(&sub(b))],
                [single(&sub(b))],
            );
            let p2 = leaf(p, p2seq.clone());
            expand_identity(p, p2, &p2seq, &sub(b))?;
            let mid = s.add_lhs(single(&sub(a))).with_rhs(vec![single(&sub(b))]);
            let lower = p.push(mid, Step::rule(RuleName::ImpL, vec![p1, p2]));
            Step::rule(RuleName::ImpR, vec![lower])
        }
        Formula::Box(a) => {
            // boxR introduces a fresh successor, boxL instantiates there
            let y = s.fresh_label();
            let ya = LabelledFormula {
                label: y.clone(),
                formula: (**a).clone(),
            };
            let upper = s
                .add_rel((x.clone(), y.clone()))
                .remove_one(Side::Lhs, &single(goal))
                .expect("goal occurs on the left")
                .add_lhs(single(&ya))
                .with_rhs(vec![single(&ya)]);
            let top = leaf(p, upper.clone());
            expand_identity(p, top, &upper, &ya)?;
            let mid = s.add_rel((x.clone(), y.clone())).with_rhs(vec![single(&ya)]);
            let lower = p.push(mid, Step::rule(RuleName::BoxL, vec![top]));
            Step::rule_fresh(RuleName::BoxR, vec![lower], y)
        }
        Formula::Dia(a) => {
            // diaL introduces the witnessing successor, diaR uses it
            let y = s.fresh_label();
            let ya = LabelledFormula {
                label: y.clone(),
                formula: (**a).clone(),
            };
            let upper = s
                .add_rel((x.clone(), y.clone()))
                .remove_one(Side::Lhs, &single(goal))
                .expect("goal occurs on the left")
                .add_lhs(single(&ya))
                .with_rhs(vec![single(&ya)]);
            let top = leaf(p, upper.clone());
            expand_identity(p, top, &upper, &ya)?;
            let mid = upper.with_rhs(vec![single(goal)]);
            let lower = p.push(mid, Step::rule(RuleName::DiaR, vec![top]));
            Step::rule_fresh(RuleName::DiaL, vec![lower], y)
        }
    };
    p.nodes.get_mut(&id).expect("node exists").step = step;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::axiom_loeb;
    use crate::prover::{prove, SearchConfig, SearchOutcome};

    fn loeb() -> Formula {
        axiom_loeb()
    }

    fn prove_in(sys: SystemId, f: Formula) -> CyclicProof {
        match prove(&f, &SearchConfig::for_system(sys)) {
            SearchOutcome::Provable(p) => p,
            other => panic!("expected a proof, got {other:?}"),
        }
    }

    #[test]
    fn single_succedent_input_embeds_without_cuts() {
        let p = prove_in(SystemId::IK4, loeb());
        let e = embed_multisuccedent(&p).unwrap();
        assert_eq!(degree_of(&e), 0);
        assert_eq!(e.system, SystemId::DIK4);
        assert_eq!(collapse(p.conclusion()).unwrap(), *e.conclusion());
    }

    #[test]
    fn multi_succedent_loeb_embeds_with_bounded_degree() {
        let p = prove_in(SystemId::MIK4, loeb());
        let width = p
            .nodes
            .values()
            .map(|n| {
                n.sequent
                    .rhs()
                    .iter()
                    .map(|d| d.degree())
                    .sum::<usize>()
            })
            .max()
            .unwrap();
        let e = embed_multisuccedent(&p).unwrap();
        assert!(degree_of(&e) >= 2, "the embedding must introduce cuts");
        assert!(
            degree_of(&e) <= width,
            "degree {} exceeds succedent width {width}",
            degree_of(&e)
        );
        assert!(e.back_edge_count() >= 1);
    }

    #[test]
    fn unfold_is_thinning_free_and_bounded() {
        let p = prove_in(SystemId::MIK4, loeb());
        let e = embed_multisuccedent(&p).unwrap();
        let t = th_free_unfold(&e, 10, 100_000);
        for n in t.reachable() {
            if let TreeStep::Rule { rule, .. } = &t.nodes[n].step {
                assert_ne!(*rule, RuleName::Th, "unfolding must splice thinning");
            }
        }
        assert!(t.open_leaves() > 0, "the cycle must be truncated");
        assert_eq!(*t.conclusion(), *e.conclusion());
    }

    #[test]
    fn bar_heights() {
        let p = prove_in(SystemId::IK4, loeb());
        let e = embed_multisuccedent(&p).unwrap();
        let t = th_free_unfold(&e, 30, 100_000);
        assert_eq!(compute_bar(&t, 0), BTreeSet::from([t.root]));
        let b3 = compute_bar(&t, 3);
        assert!(!b3.is_empty());
        // an antichain: no member is an ancestor of another
        for b in &b3 {
            let mut stack: Vec<usize> = t.children(*b).to_vec();
            while let Some(n) = stack.pop() {
                assert!(!b3.contains(&n), "bar member above bar member");
                stack.extend_from_slice(t.children(n));
            }
        }
    }

    #[test]
    fn finite_embedding_reduces_to_low_degree() {
        // p -> p | q: provable with a macro right-disjunction step, whose
        // embedding cuts against a degree-3 disjunction
        let f = Formula::imp(Formula::atom("p"), Formula::or(Formula::atom("p"), Formula::atom("q")));
        let p = prove_in(SystemId::MIK4, f);
        let e = embed_multisuccedent(&p).unwrap();
        assert!(degree_of(&e) >= 2);
        match degree_reduce_bounded(&e, 8) {
            DegreeReduceOutcome::Done(out) => {
                assert!(degree_of(&out) <= 1);
                assert_eq!(out.conclusion(), e.conclusion());
                out.check_local().unwrap();
                check_progress(&out).unwrap();
            }
            DegreeReduceOutcome::Unfinished { reason, .. } => {
                panic!("finite input should reduce: {reason}")
            }
        }
    }

    #[test]
    fn loeb_degree_reduction_closes() {
        let p = prove_in(SystemId::MIK4, loeb());
        let e = embed_multisuccedent(&p).unwrap();
        match degree_reduce_bounded(&e, 12) {
            DegreeReduceOutcome::Done(out) => {
                assert!(degree_of(&out) <= 1);
                assert_eq!(out.conclusion(), e.conclusion());
                assert!(out.max_degree() <= 1, "only labelled formulas remain");
                out.check_local().unwrap();
                check_progress(&out).unwrap();
                // expanding identity leaves turns it into a genuine
                // single-succedent proof
                let single = to_single_succedent(&out).unwrap();
                assert_eq!(single.system, SystemId::IK4);
                assert_eq!(single.conclusion(), e.conclusion());
                check_progress(&single).unwrap();
            }
            DegreeReduceOutcome::Unfinished { reason, .. } => {
                panic!("expected the rewriting to close back up: {reason}")
            }
        }
    }

    #[test]
    fn degree_one_input_is_returned_unchanged() {
        let p = prove_in(SystemId::IK4, loeb());
        let e = embed_multisuccedent(&p).unwrap();
        match degree_reduce_bounded(&e, 4) {
            DegreeReduceOutcome::Done(out) => assert_eq!(out, e),
            _ => panic!("cut-free input must be returned unchanged"),
        }
    }
}
