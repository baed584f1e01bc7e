//! Hand-written cyclic certificates used by tests, the mutation suite,
//! and the benchmarks: the single-succedent proof of Löb's axiom and the
//! classical multi-succedent proof of its diamond companion.

use crate::cyclic::{CyclicProof, Renaming, Step};
use crate::rules::{RuleName, SystemId};
use crate::sequent::Sequent;

fn seq(text: &str) -> Sequent {
    Sequent::parse(text).unwrap()
}

/// The cyclic proof of `=> x:[]([]p -> p) -> []p` in the single-succedent
/// intuitionistic system: implication and box introduction, contraction
/// and unfolding of the boxed hypothesis, a second box introduction under
/// the implication, transitivity, thinning, and one back-edge renaming
/// `y` to `z`.
pub fn loeb_certificate() -> CyclicProof {
    let mut p = CyclicProof::new(SystemId::IK4);
    let n0 = p.push(
        seq("=> x:[]([]p -> p) -> []p"),
        Step::rule(RuleName::ImpR, vec![1]),
    );
    p.push(
        seq("x:[]([]p -> p) => x:[]p"),
        Step::rule_fresh(RuleName::BoxR, vec![2], "y"),
    );
    p.push(
        seq("xRy | x:[]([]p -> p) => y:p"),
        Step::rule(RuleName::CL, vec![3]),
    );
    p.push(
        seq("xRy | x:[]([]p -> p), x:[]([]p -> p) => y:p"),
        Step::rule(RuleName::BoxL, vec![4]),
    );
    p.push(
        seq("xRy | x:[]([]p -> p), y:[]p -> p => y:p"),
        Step::rule(RuleName::ImpL, vec![5, 6]),
    );
    p.push(
        seq("xRy | x:[]([]p -> p) => y:[]p"),
        Step::rule_fresh(RuleName::BoxR, vec![7], "z"),
    );
    p.push(seq("xRy | y:p => y:p"), Step::rule(RuleName::Id, vec![]));
    p.push(
        seq("xRy, yRz | x:[]([]p -> p) => z:p"),
        Step::rule(RuleName::Tr, vec![8]),
    );
    p.push(
        seq("xRy, yRz, xRz | x:[]([]p -> p) => z:p"),
        Step::rule(RuleName::Th, vec![9]),
    );
    p.push(
        seq("xRz | x:[]([]p -> p) => z:p"),
        Step::BackEdge {
            target: 2,
            renaming: Renaming::from([("y".into(), "z".into())]),
        },
    );
    p.root = n0;
    p
}

/// The classical multi-succedent cyclic proof of
/// `=> x:<>p -> <>(p & []~p)`: the diamond hypothesis is opened at a fresh
/// `y`, the succedent diamond is kept while its witness is built, and the
/// negative box sends the branch back to the diamond stage at `z`.
pub fn contra_loeb_certificate() -> CyclicProof {
    let mut p = CyclicProof::new(SystemId::K4);
    let n0 = p.push(
        seq("=> x:<>p -> <>(p & []~p)"),
        Step::rule(RuleName::ImpR, vec![1]),
    );
    p.push(
        seq("x:<>p => x:<>(p & []~p)"),
        Step::rule_fresh(RuleName::DiaL, vec![2], "y"),
    );
    p.push(
        seq("xRy | y:p => x:<>(p & []~p)"),
        Step::rule(RuleName::MacroDiaR, vec![3]),
    );
    p.push(
        seq("xRy | y:p => x:<>(p & []~p), y:p & []~p"),
        Step::rule(RuleName::AndR, vec![4, 5]),
    );
    p.push(
        seq("xRy | y:p => x:<>(p & []~p), y:p"),
        Step::rule(RuleName::Id, vec![]),
    );
    p.push(
        seq("xRy | y:p => x:<>(p & []~p), y:[]~p"),
        Step::rule_fresh(RuleName::BoxR, vec![6], "z"),
    );
    p.push(
        seq("xRy, yRz | y:p => x:<>(p & []~p), z:~p"),
        Step::rule(RuleName::ImpR, vec![7]),
    );
    p.push(
        seq("xRy, yRz | y:p, z:p => x:<>(p & []~p), z:false"),
        Step::rule(RuleName::WR, vec![8]),
    );
    p.push(
        seq("xRy, yRz | y:p, z:p => x:<>(p & []~p)"),
        Step::rule(RuleName::Tr, vec![9]),
    );
    p.push(
        seq("xRy, yRz, xRz | y:p, z:p => x:<>(p & []~p)"),
        Step::rule(RuleName::Th, vec![10]),
    );
    p.push(
        seq("xRz | y:p, z:p => x:<>(p & []~p)"),
        Step::rule(RuleName::WL, vec![11]),
    );
    p.push(
        seq("xRz | z:p => x:<>(p & []~p)"),
        Step::BackEdge {
            target: 2,
            renaming: Renaming::from([("y".into(), "z".into())]),
        },
    );
    p.root = n0;
    p
}

/// All single-change mutants of a certificate: every relational atom
/// deleted from every sequent, and every back-edge redirected to every
/// other node.
pub fn certificate_mutants(p: &CyclicProof) -> Vec<CyclicProof> {
    let mut out = Vec::new();
    for (id, node) in &p.nodes {
        for atom in &node.sequent.rel {
            let mut m = p.clone();
            let n = m.nodes.get_mut(id).unwrap();
            let mut rel = n.sequent.rel.clone();
            rel.remove(atom);
            n.sequent = Sequent::new(
                rel,
                n.sequent.lhs().iter().cloned(),
                n.sequent.rhs().iter().cloned(),
            );
            out.push(m);
        }
        if let Step::BackEdge { target, renaming } = &node.step {
            for other in p.nodes.keys() {
                if other == target || other == id {
                    continue;
                }
                let mut m = p.clone();
                m.nodes.get_mut(id).unwrap().step = Step::BackEdge {
                    target: *other,
                    renaming: renaming.clone(),
                };
                out.push(m);
            }
        }
    }
    out
}

/// A locally valid preproof whose single cycle (contract, weaken, loop)
/// carries no progressing trace; the progress checker must reject it with
/// a witness cycle.
pub fn non_progressing_certificate() -> CyclicProof {
    let mut p = CyclicProof::new(SystemId::IK4);
    let n0 = p.push(
        seq("x:p & p => x:q"),
        Step::rule(RuleName::CL, vec![1]),
    );
    p.push(
        seq("x:p & p, x:p & p => x:q"),
        Step::rule(RuleName::WL, vec![2]),
    );
    p.push(
        seq("x:p & p => x:q"),
        Step::BackEdge {
            target: 0,
            renaming: Renaming::new(),
        },
    );
    p.root = n0;
    p
}
