//! Countermodel extraction from refutation trees.
//!
//! Each maximal run of invertible steps ending at a saturated node (a
//! *segment*) becomes a world of a Kripke structure with expanding domains;
//! the partial order is the reflexive-transitive closure of segment
//! parenthood, with back-linked repeats folded onto their companions by
//! collapsing the resulting strongly connected components.  The domain of a
//! world is the label set of its saturated sequent, the relation its
//! relational atoms, and an atom holds of a label exactly when it appears in
//! the antecedent.  Extraction is paired with an independent verifier that
//! replays the frame conditions and the falsification of the goal.

use crate::formula::{Formula, Label};
use crate::prover::{DenierStep, DenierTree};
use crate::rules::SystemId;
use crate::semantics::{
    check_igl_pred_class, kripke_satisfies, Environment, KripkeStructure,
};
use crate::sequent::Sequent;
use std::collections::BTreeMap;
use std::collections::BTreeSet;

/// A Kripke countermodel together with the point of falsification and the
/// refutation-tree nodes each world was built from.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Countermodel {
    pub structure: KripkeStructure,
    /// name of the world falsifying the goal
    pub root: String,
    /// assignment of the labels of the root sequent to domain elements
    pub env: Environment,
    /// saturated refutation-tree nodes folded into each world
    pub provenance: BTreeMap<String, Vec<usize>>,
}

/// Terminal (saturated or back-linked) node of the segment starting at `n`.
fn segment_terminal(t: &DenierTree, mut n: usize) -> usize {
    loop {
        match &t.nodes[n].step {
            DenierStep::Inv { child, .. } => n = *child,
            _ => return n,
        }
    }
}

fn sequent_atoms(s: &Sequent) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for d in s.lhs().iter().chain(s.rhs()) {
        for l in d.disjuncts() {
            for a in l.formula.atoms() {
                out.insert(a);
            }
        }
    }
    out
}

/// Atoms of the antecedent: the labels at which `p` is forced.
fn forced_atoms(s: &Sequent) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for d in s.lhs() {
        if let Some(l) = d.as_single() {
            if let Formula::Atom(a) = &l.formula {
                out.entry(a.clone()).or_default().insert(l.label.0.clone());
            }
        }
    }
    out
}

/// Build a Kripke structure from a refutation tree.
pub fn extract_countermodel(t: &DenierTree) -> Result<Countermodel, String> {
    t.validate()?;
    // saturated terminals become pre-worlds; back-link terminals alias to
    // their companions
    let mut sat_terminals: Vec<usize> = Vec::new();
    for (id, node) in t.nodes.iter().enumerate() {
        if matches!(node.step, DenierStep::Sat { .. }) && segment_terminal(t, id) == id {
            sat_terminals.push(id);
        }
    }
    let alias = |n: usize| -> usize {
        match &t.nodes[n].step {
            DenierStep::BackLink { target, .. } => *target,
            _ => n,
        }
    };
    // parenthood edges between pre-worlds, with back-links folded
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &u in &sat_terminals {
        if let DenierStep::Sat { successors } = &t.nodes[u].step {
            for s in successors {
                edges.insert((u, alias(segment_terminal(t, s.node))));
            }
        }
    }
    // reachability over pre-worlds
    let idx: BTreeMap<usize, usize> = sat_terminals
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, i))
        .collect();
    let n = sat_terminals.len();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
    }
    for (u, v) in &edges {
        reach[idx[u]][idx[v]] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if reach[i][j] {
                    for k in 0..n {
                        if reach[j][k] && !reach[i][k] {
                            reach[i][k] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // collapse strongly connected components (back-link cycles) into worlds
    let mut comp_of: Vec<Option<usize>> = vec![None; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if comp_of[i].is_some() {
            continue;
        }
        let c = comps.len();
        let members: Vec<usize> = (i..n)
            .filter(|&j| reach[i][j] && reach[j][i])
            .collect();
        for &j in &members {
            comp_of[j] = Some(c);
        }
        comps.push(members);
    }
    let comp_of: Vec<usize> = comp_of.into_iter().map(Option::unwrap).collect();
    let world_name = |c: usize| format!("w{}", sat_terminals[comps[c][0]]);
    let atoms: BTreeSet<String> = t
        .nodes
        .iter()
        .flat_map(|node| sequent_atoms(&node.sequent))
        .collect();
    let mut worlds = Vec::new();
    let mut domain = Vec::new();
    let mut pred = Vec::new();
    let mut rel = Vec::new();
    let mut provenance = BTreeMap::new();
    for (c, members) in comps.iter().enumerate() {
        worlds.push(world_name(c));
        let mut d: BTreeSet<String> = BTreeSet::new();
        let mut p: BTreeMap<String, BTreeSet<String>> =
            atoms.iter().map(|a| (a.clone(), BTreeSet::new())).collect();
        let mut r: BTreeSet<(String, String)> = BTreeSet::new();
        for &m in members {
            let seq = &t.nodes[sat_terminals[m]].sequent;
            d.extend(seq.labels().into_iter().map(|l| l.0));
            for (a, ls) in forced_atoms(seq) {
                p.entry(a).or_default().extend(ls);
            }
            r.extend(seq.rel.iter().map(|(x, y)| (x.0.clone(), y.0.clone())));
        }
        domain.push(d);
        pred.push(p);
        rel.push(r);
        provenance.insert(
            world_name(c),
            members.iter().map(|&m| sat_terminals[m]).collect(),
        );
    }
    let mut leq: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] {
                leq.insert((comp_of[i], comp_of[j]));
            }
        }
    }
    let structure = KripkeStructure {
        worlds,
        leq,
        domain,
        pred,
        rel,
    };
    let root_term = segment_terminal(t, t.root);
    let root_term = alias(root_term);
    let root = world_name(comp_of[idx[&root_term]]);
    let root_idx = comp_of[idx[&root_term]];
    let mut env = Environment::new();
    for l in t.nodes[t.root].sequent.labels() {
        if !structure.domain[root_idx].contains(&l.0) {
            return Err(format!(
                "root label {l} is not in the domain of the root world"
            ));
        }
        env.insert(l.clone(), l.0.clone());
    }
    Ok(Countermodel {
        structure,
        root,
        env,
        provenance,
    })
}

/// Independently check that `m` is a well-formed structure of the right
/// frame class and falsifies `goal` at its root under its environment.
pub fn verify_countermodel(
    m: &Countermodel,
    root_label: &Label,
    goal: &Formula,
    system: SystemId,
) -> Result<(), String> {
    m.structure.validate()?;
    let Some(root) = m.structure.world_index(&m.root) else {
        return Err(format!("root world {} does not exist", m.root));
    };
    if system.has_tr() {
        check_igl_pred_class(&m.structure)
            .map_err(|v| format!("frame class violation: {}", v.message))?;
    }
    if !m.env.contains_key(root_label) {
        return Err(format!("environment does not assign {root_label}"));
    }
    if kripke_satisfies(&m.structure, root, &m.env, root_label, goal) {
        return Err(format!(
            "goal {goal} is satisfied at {}:{root_label}",
            m.root
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::contra_loeb;
    use crate::prover::{prove, SearchConfig, SearchOutcome};
    use crate::semantics::{birel_satisfies, check_igl_birel_class, pred_to_birel};

    fn refute(f: &str, sys: SystemId) -> DenierTree {
        let formula = Formula::parse(f).unwrap();
        match prove(&formula, &SearchConfig::for_system(sys)) {
            SearchOutcome::Refutable(t) => t,
            o => panic!("{f}: expected Refutable, got {o:?}"),
        }
    }

    fn extract_and_verify(f: &str, sys: SystemId) -> Countermodel {
        let t = refute(f, sys);
        let m = extract_countermodel(&t).unwrap();
        let goal = Formula::parse(f).unwrap();
        verify_countermodel(&m, &Label::from("x"), &goal, sys)
            .unwrap_or_else(|e| panic!("{f} in {sys}: bad countermodel: {e}"));
        m
    }

    #[test]
    fn excluded_middle_countermodel() {
        let m = extract_and_verify("p | ~p", SystemId::IK4);
        // one world refutes p, a later one forces it
        assert!(m.structure.worlds.len() >= 2);
    }

    #[test]
    fn peirce_countermodel_folds_loop() {
        let m = extract_and_verify("(p -> q) -> p", SystemId::IK4);
        assert_eq!(m.structure.worlds.len(), 1);
    }

    #[test]
    fn contra_loeb_countermodels() {
        for sys in [SystemId::IK4, SystemId::MIK4] {
            let m = extract_and_verify(&contra_loeb().to_string(), sys);
            // the translated birelational model also falsifies the goal
            let b = pred_to_birel(&m.structure);
            check_igl_birel_class(&b).unwrap();
            let point = format!("{}/x", m.root);
            let w = b.world_index(&point).unwrap();
            assert!(!birel_satisfies(&b, w, &contra_loeb()));
        }
    }

    #[test]
    fn atom_countermodel_is_a_single_point() {
        let m = extract_and_verify("p", SystemId::IK4);
        assert_eq!(m.structure.worlds.len(), 1);
        assert!(m.structure.rel[0].is_empty());
    }
}
