//! Executable proof transformations: the admissibility lemmas as rewriters.
//!
//! Every operation validates its input proof, performs the structural
//! recursion of the corresponding lemma, and returns a proof that re-checks
//! valid. Depth bounds follow the lemmas: weakening, inversion, contraction,
//! K-elimination and K-contraction preserve depth; extended K-introduction
//! adds at most one; set-normalization never increases depth.

use thiserror::Error;

use crate::calculus::{check_proof, Annotation, CalculusId, ProofTree, RuleName};
use crate::formula::Formula;
use crate::sequent::{Multiset, Sequent};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("invalid input proof: {0}")]
    InvalidProof(String),
    #[error("{0}")]
    BadArgument(String),
    #[error("internal transformation failure: {0}")]
    Internal(String),
}

type Result<T> = std::result::Result<T, TransformError>;

fn bad(msg: impl Into<String>) -> TransformError {
    TransformError::BadArgument(msg.into())
}

fn internal(msg: impl Into<String>) -> TransformError {
    TransformError::Internal(msg.into())
}

fn ensure_valid(cal: CalculusId, t: &ProofTree) -> Result<()> {
    match check_proof(cal, t) {
        v if v.is_valid() => Ok(()),
        v => Err(TransformError::InvalidProof(v.to_string())),
    }
}

/// Bodies (with multiplicity) of all K-formula occurrences in `m`.
fn all_bodies(m: &Multiset) -> Multiset {
    let mut out = Multiset::new();
    for (f, n) in m.counts() {
        if let Formula::Know(b) = f {
            out.insert_n((**b).clone(), n);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Weakening
// ---------------------------------------------------------------------------

/// Depth-preserving weakening: from a proof of `Γ ⇒ F` build a proof of
/// `Γ,G ⇒ F` of the same shape. At `(KI1)`/`(KI1W)` nodes a weakening
/// K-formula is absorbed into `Δ`, as the side condition requires.
pub fn weaken(t: &ProofTree, g: &Formula) -> Result<ProofTree> {
    ensure_valid(CalculusId::IelgMinus, t)?;
    weaken_impl(t, g)
}

fn weaken_impl(t: &ProofTree, g: &Formula) -> Result<ProofTree> {
    let goal = t.conclusion.goal.clone();
    let new_ante = t.conclusion.antecedent.plus(g);
    match t.rule {
        RuleName::Axiom | RuleName::KBotAxiom => Ok(ProofTree::leaf(
            t.rule,
            Sequent::new(new_ante, goal),
            t.annotation.clone(),
        )),
        RuleName::KI1 => {
            let Annotation::Delta(delta) = &t.annotation else {
                return Err(internal("KI1 without Delta annotation"));
            };
            if let Formula::Know(b) = g {
                let premise = weaken_impl(&weaken_impl(&t.premises[0], g)?, b)?;
                Ok(ProofTree::node(
                    RuleName::KI1,
                    Sequent::new(new_ante, goal),
                    Annotation::Delta(delta.plus(b)),
                    vec![premise],
                ))
            } else {
                let premise = weaken_impl(&t.premises[0], g)?;
                Ok(ProofTree::node(
                    RuleName::KI1,
                    Sequent::new(new_ante, goal),
                    Annotation::Delta(delta.clone()),
                    vec![premise],
                ))
            }
        }
        RuleName::KI1W => {
            let Annotation::DeltaSplit(d1, d2) = &t.annotation else {
                return Err(internal("KI1W without DeltaSplit annotation"));
            };
            if let Formula::Know(b) = g {
                let premise = weaken_impl(&weaken_impl(&t.premises[0], g)?, b)?;
                Ok(ProofTree::node(
                    RuleName::KI1W,
                    Sequent::new(new_ante, goal),
                    Annotation::DeltaSplit(d1.clone(), d2.plus(b)),
                    vec![premise],
                ))
            } else {
                let premise = weaken_impl(&t.premises[0], g)?;
                Ok(ProofTree::node(
                    RuleName::KI1W,
                    Sequent::new(new_ante, goal),
                    Annotation::DeltaSplit(d1.clone(), d2.clone()),
                    vec![premise],
                ))
            }
        }
        RuleName::KI0 => {
            // the conclusion antecedent must stay a K-image
            let Formula::Know(b) = g else {
                return Err(bad("cannot weaken a KI0 conclusion by a non-K formula"));
            };
            let premise = weaken_impl(&t.premises[0], b)?;
            Ok(ProofTree::node(
                RuleName::KI0,
                Sequent::new(new_ante, goal),
                Annotation::None,
                vec![premise],
            ))
        }
        RuleName::Cut => {
            // weaken the left premise only; the context sum gains g
            let left = weaken_impl(&t.premises[0], g)?;
            Ok(ProofTree::node(
                RuleName::Cut,
                Sequent::new(new_ante, goal),
                t.annotation.clone(),
                vec![left, t.premises[1].clone()],
            ))
        }
        _ => {
            // context-uniform rules: add g to the conclusion and every premise
            let premises = t
                .premises
                .iter()
                .map(|p| weaken_impl(p, g))
                .collect::<Result<Vec<_>>>()?;
            Ok(ProofTree::node(
                t.rule,
                Sequent::new(new_ante, goal),
                t.annotation.clone(),
                premises,
            ))
        }
    }
}

fn weaken_many(t: &ProofTree, ms: &Multiset) -> Result<ProofTree> {
    let mut out = t.clone();
    for g in ms.iter() {
        out = weaken_impl(&out, g)?;
    }
    Ok(out)
}

/// Rebuilds a `(KI1)` node with conclusion `target ⇒ K body` from a premise
/// proving a subantecedent of `target ⊎ Δ*`, where `Δ*` collects the bodies
/// of all K-formulas of `target`; missing occurrences are weakened in. This
/// realizes the `(KI_ext)` corollary with the maximal `Δ`.
fn ki1_from(target: Multiset, body: &Formula, premise: ProofTree) -> Result<ProofTree> {
    let delta = all_bodies(&target);
    let needed = target.sum(&delta);
    let missing = needed
        .checked_sub(&premise.conclusion.antecedent)
        .ok_or_else(|| {
            internal(format!(
                "KI1 rebuild: premise '{}' is not below '{}'",
                premise.conclusion,
                Sequent::new(needed.clone(), body.clone())
            ))
        })?;
    let premise = weaken_many(&premise, &missing)?;
    Ok(ProofTree::node(
        RuleName::KI1,
        Sequent::new(target, Formula::know(body.clone())),
        Annotation::Delta(delta),
        vec![premise],
    ))
}

// ---------------------------------------------------------------------------
// Shared context recursion
// ---------------------------------------------------------------------------

/// Rewrites every sequent of `t` by removing one occurrence of `remove` and
/// adding `add`, recursing through `go`, for nodes where the displayed
/// occurrence is not principal. `(KI1)` nodes are rebuilt via [`ki1_from`].
fn map_context(
    t: &ProofTree,
    remove: &Formula,
    add: &[Formula],
    go: &dyn Fn(&ProofTree) -> Result<ProofTree>,
) -> Result<ProofTree> {
    let mut new_ante = t
        .conclusion
        .antecedent
        .minus_one(remove)
        .ok_or_else(|| internal(format!("'{remove}' missing from '{}'", t.conclusion)))?;
    for a in add {
        new_ante.insert(a.clone());
    }
    let goal = t.conclusion.goal.clone();
    match t.rule {
        RuleName::Axiom | RuleName::KBotAxiom => Ok(ProofTree::leaf(
            t.rule,
            Sequent::new(new_ante, goal),
            t.annotation.clone(),
        )),
        RuleName::KI1 => {
            let Formula::Know(b) = &goal else {
                return Err(internal("KI1 with non-K goal"));
            };
            let child = go(&t.premises[0])?;
            ki1_from(new_ante, b, child)
        }
        _ => {
            let premises = t
                .premises
                .iter()
                .map(go)
                .collect::<Result<Vec<_>>>()?;
            Ok(ProofTree::node(
                t.rule,
                Sequent::new(new_ante, goal),
                t.annotation.clone(),
                premises,
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

/// Inversion of a left-rule principal: for `A∧B` one proof of `Γ,A,B ⇒ C`;
/// for `A∨B` proofs of `Γ,A ⇒ C` and `Γ,B ⇒ C`; for `A→B` one proof of
/// `Γ,B ⇒ C`. Depth never increases.
pub fn invert_left(t: &ProofTree, principal: &Formula) -> Result<Vec<ProofTree>> {
    ensure_valid(CalculusId::IelgMinus, t)?;
    if !t.conclusion.antecedent.contains(principal) {
        return Err(bad(format!(
            "principal '{principal}' not in the conclusion antecedent"
        )));
    }
    match principal {
        Formula::And(a, b) => Ok(vec![invert_and_impl(t, principal, a, b)?]),
        Formula::Or(a, b) => Ok(vec![
            invert_or_side(t, principal, a, 0)?,
            invert_or_side(t, principal, b, 1)?,
        ]),
        Formula::Implies(_, b) => Ok(vec![invert_imp_impl(t, principal, b)?]),
        _ => Err(bad(format!(
            "principal '{principal}' is not a conjunction, disjunction or implication"
        ))),
    }
}

fn invert_and_impl(t: &ProofTree, f: &Formula, a: &Formula, b: &Formula) -> Result<ProofTree> {
    if t.rule == RuleName::AndL && t.annotation == Annotation::Principal(f.clone()) {
        return Ok(t.premises[0].clone());
    }
    map_context(t, f, &[a.clone(), b.clone()], &|p| {
        invert_and_impl(p, f, a, b)
    })
}

fn invert_or_side(t: &ProofTree, f: &Formula, side: &Formula, idx: usize) -> Result<ProofTree> {
    if t.rule == RuleName::OrL && t.annotation == Annotation::Principal(f.clone()) {
        return Ok(t.premises[idx].clone());
    }
    map_context(t, f, &[side.clone()], &|p| invert_or_side(p, f, side, idx))
}

fn invert_imp_impl(t: &ProofTree, f: &Formula, b: &Formula) -> Result<ProofTree> {
    if t.rule == RuleName::ImpL && t.annotation == Annotation::Principal(f.clone()) {
        return Ok(t.premises[1].clone());
    }
    map_context(t, f, &[b.clone()], &|p| invert_imp_impl(p, f, b))
}

// ---------------------------------------------------------------------------
// Contraction
// ---------------------------------------------------------------------------

/// Depth-preserving contraction: from a proof of `Γ,F,F ⇒ G` build a proof
/// of `Γ,F ⇒ G`.
pub fn contract(t: &ProofTree, f: &Formula) -> Result<ProofTree> {
    ensure_valid(CalculusId::IelgMinus, t)?;
    if t.conclusion.antecedent.multiplicity(f) < 2 {
        return Err(bad(format!(
            "'{f}' has multiplicity < 2 in '{}'",
            t.conclusion
        )));
    }
    contract_impl(t, f)
}

fn contract_impl(t: &ProofTree, f: &Formula) -> Result<ProofTree> {
    let ante = &t.conclusion.antecedent;
    let goal = t.conclusion.goal.clone();
    let rest = ante
        .minus_one(f)
        .ok_or_else(|| internal("contract: formula missing"))?;
    let principal_is_f = t.annotation == Annotation::Principal(f.clone());
    match (t.rule, f) {
        (RuleName::AndL, Formula::And(a, b)) if principal_is_f => {
            // premise proves rest,A,B ⇒ C with another copy of f in rest
            let q = invert_and_impl(&t.premises[0], f, a, b)?;
            let q = contract_impl(&q, a)?;
            let q = contract_impl(&q, b)?;
            Ok(ProofTree::node(
                RuleName::AndL,
                Sequent::new(rest, goal),
                Annotation::Principal(f.clone()),
                vec![q],
            ))
        }
        (RuleName::OrL, Formula::Or(a, b)) if principal_is_f => {
            let q0 = invert_or_side(&t.premises[0], f, a, 0)?;
            let q0 = contract_impl(&q0, a)?;
            let q1 = invert_or_side(&t.premises[1], f, b, 1)?;
            let q1 = contract_impl(&q1, b)?;
            Ok(ProofTree::node(
                RuleName::OrL,
                Sequent::new(rest, goal),
                Annotation::Principal(f.clone()),
                vec![q0, q1],
            ))
        }
        (RuleName::ImpL, Formula::Implies(_, b)) if principal_is_f => {
            let p0 = contract_impl(&t.premises[0], f)?;
            let q1 = invert_imp_impl(&t.premises[1], f, b)?;
            let q1 = contract_impl(&q1, b)?;
            Ok(ProofTree::node(
                RuleName::ImpL,
                Sequent::new(rest, goal),
                Annotation::Principal(f.clone()),
                vec![p0, q1],
            ))
        }
        (RuleName::KI1, Formula::Know(a)) => {
            // f sits inside K(Δ): remove one KA and one A from the premise,
            // then rebuild with Δ⁻ (§4, "Case F=KA is new")
            let Formula::Know(body) = &goal else {
                return Err(internal("KI1 with non-K goal"));
            };
            let p = contract_impl(&t.premises[0], f)?;
            let p = contract_impl(&p, a)?;
            ki1_from(rest, body, p)
        }
        _ => map_context(t, f, &[], &|p| contract_impl(p, f)),
    }
}

// ---------------------------------------------------------------------------
// K-elimination and K-contraction
// ---------------------------------------------------------------------------

/// Depth-preserving K-elimination: from a proof of `Γ,KF ⇒ G` build a proof
/// of `Γ,F ⇒ G`.
pub fn k_eliminate(t: &ProofTree, kf: &Formula) -> Result<ProofTree> {
    ensure_valid(CalculusId::IelgMinus, t)?;
    let Formula::Know(_) = kf else {
        return Err(bad(format!("'{kf}' is not a K-formula")));
    };
    if !t.conclusion.antecedent.contains(kf) {
        return Err(bad(format!(
            "'{kf}' not in the conclusion antecedent of '{}'",
            t.conclusion
        )));
    }
    k_eliminate_impl(t, kf)
}

fn k_eliminate_impl(t: &ProofTree, kf: &Formula) -> Result<ProofTree> {
    let Formula::Know(f) = kf else {
        return Err(internal("k_eliminate on a non-K formula"));
    };
    let f: &Formula = f;
    if t.rule == RuleName::KI1 {
        // KF necessarily sits inside K(Δ): the main case of the §5 lemma
        let Formula::Know(body) = &t.conclusion.goal else {
            return Err(internal("KI1 with non-K goal"));
        };
        let rest = t
            .conclusion
            .antecedent
            .minus_one(kf)
            .ok_or_else(|| internal("k_eliminate: formula missing"))?;
        let target = rest.plus(f);
        let p = k_eliminate_impl(&t.premises[0], kf)?;
        let p = contract_impl(&p, f)?;
        ki1_from(target, body, p)
    } else {
        map_context(t, kf, &[f.clone()], &|p| k_eliminate_impl(p, kf))
    }
}

/// Depth-preserving K-contraction: from a proof of `Γ,KF,F ⇒ G` build a
/// proof of `Γ,F ⇒ G` (K-elimination followed by contraction).
pub fn k_contract(t: &ProofTree, f: &Formula) -> Result<ProofTree> {
    ensure_valid(CalculusId::IelgMinus, t)?;
    let kf = Formula::know(f.clone());
    if !t.conclusion.antecedent.contains(&kf) || !t.conclusion.antecedent.contains(f) {
        return Err(bad(format!(
            "conclusion '{}' does not contain both '{kf}' and '{f}'",
            t.conclusion
        )));
    }
    k_contract_impl(t, f)
}

fn k_contract_impl(t: &ProofTree, f: &Formula) -> Result<ProofTree> {
    let kf = Formula::know(f.clone());
    let p = k_eliminate_impl(t, &kf)?;
    contract_impl(&p, f)
}

// ---------------------------------------------------------------------------
// Extended K-introduction
// ---------------------------------------------------------------------------

/// `(KI_ext)`: from a proof of `Γ₁,K(Δ),Δ,Γ₂ ⇒ F` under the stated
/// partition, build a proof of `Γ₁,K(Δ,Γ₂) ⇒ KF` of depth at most
/// `depth(t)+1`.
pub fn ki_ext(
    t: &ProofTree,
    gamma1: &Multiset,
    delta: &Multiset,
    gamma2: &Multiset,
) -> Result<ProofTree> {
    ensure_valid(CalculusId::IelgMinus, t)?;
    let expected = gamma1
        .sum(&delta.know_image())
        .sum(delta)
        .sum(gamma2);
    if t.conclusion.antecedent != expected {
        return Err(bad(format!(
            "partition mismatch: proof concludes '{}', partition describes '{}'",
            t.conclusion,
            Sequent::new(expected, t.conclusion.goal.clone())
        )));
    }
    let target = gamma1.sum(&delta.sum(gamma2).know_image());
    ki1_from(target, &t.conclusion.goal.clone(), t.clone())
}

// ---------------------------------------------------------------------------
// Cut elimination
// ---------------------------------------------------------------------------

/// A single cut: `left` proves `Γ₁ ⇒ F`, `right` proves `Γ₂,F ⇒ G`.
#[derive(Clone, Debug)]
pub struct CutInstance {
    pub left: ProofTree,
    pub right: ProofTree,
    pub cut_formula: Formula,
}

impl CutInstance {
    pub fn new(left: ProofTree, right: ProofTree, cut_formula: Formula) -> Result<CutInstance> {
        if left.conclusion.goal != cut_formula {
            return Err(bad(format!(
                "left premise proves '{}', not the cut formula '{cut_formula}'",
                left.conclusion
            )));
        }
        if !right.conclusion.antecedent.contains(&cut_formula) {
            return Err(bad(format!(
                "right premise '{}' does not contain the cut formula '{cut_formula}'",
                right.conclusion
            )));
        }
        Ok(CutInstance {
            left,
            right,
            cut_formula,
        })
    }

    /// Rank: the length of the cut formula.
    pub fn rank(&self) -> usize {
        self.cut_formula.length()
    }

    /// Level: the sum of the depths of the premises.
    pub fn level(&self) -> usize {
        self.left.depth() + self.right.depth()
    }

    /// The conclusion `Γ₁,Γ₂ ⇒ G` of the cut.
    pub fn conclusion(&self) -> Sequent {
        let gamma2 = self
            .right
            .conclusion
            .antecedent
            .minus_one(&self.cut_formula)
            .expect("validated on construction");
        Sequent::new(
            self.left.conclusion.antecedent.sum(&gamma2),
            self.right.conclusion.goal.clone(),
        )
    }
}

/// Eliminates a single cut between cut-free `IELG-` proofs, by induction on
/// the well-order (rank, level).
pub fn eliminate_cut(c: &CutInstance) -> Result<ProofTree> {
    ensure_valid(CalculusId::IelgMinus, &c.left)?;
    ensure_valid(CalculusId::IelgMinus, &c.right)?;
    if c.left.cut_count() != 0 || c.right.cut_count() != 0 {
        return Err(bad("cut premises must be cut-free"));
    }
    cut_elim(&c.left, &c.right, &c.cut_formula)
}

fn right_main(right: &ProofTree, f: &Formula) -> bool {
    match right.rule {
        RuleName::AndL | RuleName::OrL | RuleName::ImpL => {
            right.annotation == Annotation::Principal(f.clone())
        }
        // a K-formula in the antecedent of a (KI1) conclusion sits in K(Δ)
        RuleName::KI1 => f.is_know(),
        _ => false,
    }
}

fn cut_elim(left: &ProofTree, right: &ProofTree, f: &Formula) -> Result<ProofTree> {
    let gamma1 = &left.conclusion.antecedent;
    let gamma2 = right
        .conclusion
        .antecedent
        .minus_one(f)
        .ok_or_else(|| internal("cut formula missing from the right premise"))?;
    let target = gamma1.sum(&gamma2);
    let goal = right.conclusion.goal.clone();

    // Case I: an axiom premise.
    if left.rule == RuleName::Axiom {
        // f is the atomic axiom goal; weaken the right premise by Γ₁ ∖ f
        let extra = gamma1
            .minus_one(f)
            .ok_or_else(|| internal("axiom principal missing"))?;
        return weaken_many(right, &extra);
    }
    if right.rule == RuleName::Axiom {
        if target.contains(&goal) {
            return Ok(ProofTree::axiom(Sequent::new(target, goal.clone()), goal));
        }
        // the axiom principal was the cut occurrence, so G = f
        return weaken_many(left, &gamma2);
    }

    // Left premise ends with (U): no cut is needed at all.
    if left.rule == RuleName::U {
        let p = weaken_many(&left.premises[0], &gamma2)?;
        if goal == Formula::know(Formula::Bottom) {
            return Ok(p);
        }
        return Ok(ProofTree::node(
            RuleName::U,
            Sequent::new(target, goal),
            Annotation::None,
            vec![p],
        ));
    }

    // Case II, left: the cut formula is not main for a left rule ending the
    // left premise; permute the cut upward into it.
    match left.rule {
        RuleName::AndL => {
            let c = cut_elim(&left.premises[0], right, f)?;
            return Ok(ProofTree::node(
                RuleName::AndL,
                Sequent::new(target, goal),
                left.annotation.clone(),
                vec![c],
            ));
        }
        RuleName::OrL => {
            let c0 = cut_elim(&left.premises[0], right, f)?;
            let c1 = cut_elim(&left.premises[1], right, f)?;
            return Ok(ProofTree::node(
                RuleName::OrL,
                Sequent::new(target, goal),
                left.annotation.clone(),
                vec![c0, c1],
            ));
        }
        RuleName::ImpL => {
            let p0 = weaken_many(&left.premises[0], &gamma2)?;
            let c1 = cut_elim(&left.premises[1], right, f)?;
            return Ok(ProofTree::node(
                RuleName::ImpL,
                Sequent::new(target, goal),
                left.annotation.clone(),
                vec![p0, c1],
            ));
        }
        _ => {}
    }

    // Case II, right: permute the cut into the right premise.
    if !right_main(right, f) {
        match right.rule {
            RuleName::AndR | RuleName::OrR1 | RuleName::OrR2 | RuleName::U => {
                let premises = right
                    .premises
                    .iter()
                    .map(|q| cut_elim(left, q, f))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(ProofTree::node(
                    right.rule,
                    Sequent::new(target, goal),
                    Annotation::None,
                    premises,
                ));
            }
            RuleName::ImpR => {
                let c = cut_elim(left, &right.premises[0], f)?;
                return Ok(ProofTree::node(
                    RuleName::ImpR,
                    Sequent::new(target, goal),
                    Annotation::None,
                    vec![c],
                ));
            }
            RuleName::AndL | RuleName::OrL | RuleName::ImpL => {
                let premises = right
                    .premises
                    .iter()
                    .map(|q| cut_elim(left, q, f))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(ProofTree::node(
                    right.rule,
                    Sequent::new(target, goal),
                    right.annotation.clone(),
                    premises,
                ));
            }
            RuleName::KI1 => {
                // f is not a K-formula here; Γ₁ may contain K-formulas, so
                // rebuild via the (KI_ext)-style helper rather than raw (KI1)
                let Formula::Know(b) = &goal else {
                    return Err(internal("KI1 with non-K goal"));
                };
                let c = cut_elim(left, &right.premises[0], f)?;
                return ki1_from(target, b, c);
            }
            _ => return Err(internal(format!("unexpected rule {} in cut", right.rule))),
        }
    }

    // Case III: the cut formula is main on both sides; reduce the rank.
    match (f, left.rule) {
        (Formula::And(a, b), RuleName::AndR) => {
            // right = AndL with principal f, premise Γ₂,A,B ⇒ G
            let rp = &right.premises[0];
            let c1 = cut_elim(&left.premises[0], rp, a)?;
            let c2 = cut_elim(&left.premises[1], &c1, b)?;
            let mut out = c2;
            for g in gamma1.iter() {
                out = contract_impl(&out, g)?;
            }
            Ok(out)
        }
        (Formula::Or(a, _), RuleName::OrR1) => cut_elim(&left.premises[0], &right.premises[0], a),
        (Formula::Or(_, b), RuleName::OrR2) => cut_elim(&left.premises[0], &right.premises[1], b),
        (Formula::Implies(a, b), RuleName::ImpR) => {
            // right = ImpL with principal f: r0 proves Γ₂,f ⇒ A (level drops)
            let c1 = cut_elim(left, &right.premises[0], f)?;
            let c2 = cut_elim(&c1, &left.premises[0], a)?;
            let c3 = cut_elim(&c2, &right.premises[1], b)?;
            let mut out = c3;
            for g in gamma1.iter().chain(gamma2.iter()) {
                out = contract_impl(&out, g)?;
            }
            Ok(out)
        }
        (Formula::Know(a), RuleName::KI1) => {
            // both premises end with (KI1); K-contract the right subpremise,
            // cut on A, then rebuild (§6, case F=KA)
            let Formula::Know(body) = &goal else {
                return Err(internal("KI1 with non-K goal"));
            };
            let kc = k_contract_impl(&right.premises[0], a)?;
            let c = cut_elim(&left.premises[0], &kc, a)?;
            ki1_from(target, body, c)
        }
        _ => Err(internal(format!(
            "unmatched principal cut: formula '{f}', left rule {}, right rule {}",
            left.rule, right.rule
        ))),
    }
}

// ---------------------------------------------------------------------------
// Calculus conversion
// ---------------------------------------------------------------------------

/// Converts a proof in any of the four calculi into a cut-free `IELG-` proof
/// of the same end-sequent. `IELG`-specific rules (`KBotAxiom`, `KI0`, `KC`)
/// are compiled away via `(KI_ext)` and K-contraction, `(C)` via contraction,
/// `(Cut)` via single-cut elimination, and the contraction-absorbed `IELG++`
/// rules via their ground-rule simulations.
fn convert_to_minus(t: &ProofTree) -> Result<ProofTree> {
    let ante = &t.conclusion.antecedent;
    let goal = t.conclusion.goal.clone();
    let kbot = Formula::know(Formula::Bottom);
    match t.rule {
        RuleName::Axiom => Ok(t.clone()),
        RuleName::KBotAxiom => {
            let base = ante
                .minus_one(&kbot)
                .ok_or_else(|| internal("KBotAxiom without K_|_"))?
                .plus(&Formula::Bottom);
            let ax = ProofTree::axiom(Sequent::new(base, Formula::Bottom), Formula::Bottom);
            let k = ki1_from(ante.clone(), &Formula::Bottom, ax)?;
            if goal == kbot {
                return Ok(k);
            }
            Ok(ProofTree::node(
                RuleName::U,
                Sequent::new(ante.clone(), goal),
                Annotation::None,
                vec![k],
            ))
        }
        RuleName::KI0 => {
            let Formula::Know(b) = &goal else {
                return Err(internal("KI0 with non-K goal"));
            };
            let c = convert_to_minus(&t.premises[0])?;
            ki1_from(ante.clone(), b, c)
        }
        RuleName::KC => {
            let Annotation::Principal(h) = &t.annotation else {
                return Err(internal("KC without principal"));
            };
            let c = convert_to_minus(&t.premises[0])?;
            let c = k_eliminate_impl(&c, &Formula::know(h.clone()))?;
            contract_impl(&c, h)
        }
        RuleName::C => {
            let Annotation::Contract(delta) = &t.annotation else {
                return Err(internal("C without Contract annotation"));
            };
            let mut c = convert_to_minus(&t.premises[0])?;
            for g in delta.iter() {
                c = contract_impl(&c, g)?;
            }
            Ok(c)
        }
        RuleName::Cut => {
            let Annotation::CutFormula(f) = &t.annotation else {
                return Err(internal("Cut without cut formula"));
            };
            let l = convert_to_minus(&t.premises[0])?;
            let r = convert_to_minus(&t.premises[1])?;
            cut_elim(&l, &r, f)
        }
        RuleName::ImpL => {
            let Annotation::Principal(h) = &t.annotation else {
                return Err(internal("ImpL without principal"));
            };
            let p0 = convert_to_minus(&t.premises[0])?;
            let p1 = convert_to_minus(&t.premises[1])?;
            // the IELG+ form omits the principal from the first premise
            let p0 = if &p0.conclusion.antecedent == ante {
                p0
            } else {
                weaken_impl(&p0, h)?
            };
            Ok(ProofTree::node(
                RuleName::ImpL,
                Sequent::new(ante.clone(), goal),
                t.annotation.clone(),
                vec![p0, p1],
            ))
        }
        RuleName::AndL
        | RuleName::AndR
        | RuleName::OrL
        | RuleName::OrR1
        | RuleName::OrR2
        | RuleName::ImpR
        | RuleName::KI1
        | RuleName::U => {
            let premises = t
                .premises
                .iter()
                .map(convert_to_minus)
                .collect::<Result<Vec<_>>>()?;
            Ok(ProofTree::node(
                t.rule,
                Sequent::new(ante.clone(), goal),
                t.annotation.clone(),
                premises,
            ))
        }
        RuleName::AndL1C | RuleName::AndL2C | RuleName::AndLC => {
            let Annotation::Principal(h) = &t.annotation else {
                return Err(internal("AndL*C without principal"));
            };
            let Formula::And(a, b) = h else {
                return Err(internal("AndL*C principal is not a conjunction"));
            };
            let c = convert_to_minus(&t.premises[0])?;
            let big = ante.plus(h);
            let needed = ante.plus(a).plus(b);
            let missing = needed
                .checked_sub(&c.conclusion.antecedent)
                .ok_or_else(|| internal("AndL*C premise mismatch"))?;
            let c = weaken_many(&c, &missing)?;
            let node = ProofTree::node(
                RuleName::AndL,
                Sequent::new(big, goal),
                Annotation::Principal(h.clone()),
                vec![c],
            );
            contract_impl(&node, h)
        }
        RuleName::OrLC => {
            let Annotation::Principal(h) = &t.annotation else {
                return Err(internal("OrLC without principal"));
            };
            let c0 = convert_to_minus(&t.premises[0])?;
            let c1 = convert_to_minus(&t.premises[1])?;
            let node = ProofTree::node(
                RuleName::OrL,
                Sequent::new(ante.plus(h), goal),
                Annotation::Principal(h.clone()),
                vec![c0, c1],
            );
            contract_impl(&node, h)
        }
        RuleName::ImpLC => {
            let Annotation::Principal(h) = &t.annotation else {
                return Err(internal("ImpLC without principal"));
            };
            let c0 = weaken_impl(&convert_to_minus(&t.premises[0])?, h)?;
            let c1 = convert_to_minus(&t.premises[1])?;
            let node = ProofTree::node(
                RuleName::ImpL,
                Sequent::new(ante.plus(h), goal),
                Annotation::Principal(h.clone()),
                vec![c0, c1],
            );
            contract_impl(&node, h)
        }
        RuleName::ImpRW => {
            let Formula::Implies(a, _) = &goal else {
                return Err(internal("ImpRW with non-implication goal"));
            };
            let c = weaken_impl(&convert_to_minus(&t.premises[0])?, a)?;
            Ok(ProofTree::node(
                RuleName::ImpR,
                Sequent::new(ante.clone(), goal.clone()),
                Annotation::None,
                vec![c],
            ))
        }
        RuleName::KI1W | RuleName::KI => {
            let Formula::Know(b) = &goal else {
                return Err(internal("K-introduction with non-K goal"));
            };
            let c = convert_to_minus(&t.premises[0])?;
            ki1_from(ante.clone(), b, c)
        }
        RuleName::KE => Err(bad("KE nodes belong to no calculus")),
    }
}

/// Full cut elimination: accepts a proof in `IELG` (or an already cut-free
/// `IELG-` proof) and produces a cut-free `IELG-` proof of the same
/// end-sequent, eliminating topmost cuts first.
pub fn eliminate_cuts(t: &ProofTree) -> Result<ProofTree> {
    if !check_proof(CalculusId::Ielg, t).is_valid() {
        ensure_valid(CalculusId::IelgMinus, t)?;
    }
    convert_to_minus(t)
}

/// Replays every `IELG+`/`IELG++` rule by its admissible `IELG-` simulation.
pub fn expand_to_minus(cal: CalculusId, t: &ProofTree) -> Result<ProofTree> {
    ensure_valid(cal, t)?;
    convert_to_minus(t)
}

// ---------------------------------------------------------------------------
// Monotonization
// ---------------------------------------------------------------------------

/// Adds one copy of `a` to the antecedent of every sequent of `t`, unfolding
/// `K`-bodies above `(KI1)`/`(KI1W)` conclusions as the §7 procedure demands.
fn add_formula(t: &ProofTree, a: &Formula) -> Result<ProofTree> {
    let new_ante = t.conclusion.antecedent.plus(a);
    let goal = t.conclusion.goal.clone();
    match t.rule {
        RuleName::KI1 => {
            let Annotation::Delta(delta) = &t.annotation else {
                return Err(internal("KI1 without Delta annotation"));
            };
            if let Formula::Know(b) = a {
                let p = add_formula(&add_formula(&t.premises[0], a)?, b)?;
                Ok(ProofTree::node(
                    RuleName::KI1,
                    Sequent::new(new_ante, goal),
                    Annotation::Delta(delta.plus(b)),
                    vec![p],
                ))
            } else {
                let p = add_formula(&t.premises[0], a)?;
                Ok(ProofTree::node(
                    RuleName::KI1,
                    Sequent::new(new_ante, goal),
                    Annotation::Delta(delta.clone()),
                    vec![p],
                ))
            }
        }
        RuleName::KI1W => {
            let Annotation::DeltaSplit(d1, d2) = &t.annotation else {
                return Err(internal("KI1W without DeltaSplit annotation"));
            };
            if let Formula::Know(b) = a {
                let p = add_formula(&add_formula(&t.premises[0], a)?, b)?;
                Ok(ProofTree::node(
                    RuleName::KI1W,
                    Sequent::new(new_ante, goal),
                    Annotation::DeltaSplit(d1.clone(), d2.plus(b)),
                    vec![p],
                ))
            } else {
                let p = add_formula(&t.premises[0], a)?;
                Ok(ProofTree::node(
                    RuleName::KI1W,
                    Sequent::new(new_ante, goal),
                    Annotation::DeltaSplit(d1.clone(), d2.clone()),
                    vec![p],
                ))
            }
        }
        RuleName::KI0 | RuleName::KC | RuleName::Cut | RuleName::KE => Err(bad(format!(
            "monotonization is defined for IELG++ proofs; found {}",
            t.rule
        ))),
        _ => {
            let premises = t
                .premises
                .iter()
                .map(|p| add_formula(p, a))
                .collect::<Result<Vec<_>>>()?;
            Ok(ProofTree::node(
                t.rule,
                Sequent::new(new_ante, goal),
                t.annotation.clone(),
                premises,
            ))
        }
    }
}

/// First non-monotone instance in root-to-leaf, left-to-right order, with
/// the smallest formula missing from a premise antecedent.
fn find_non_monotone(t: &ProofTree, path: &mut Vec<usize>) -> Option<(Vec<usize>, Formula)> {
    for p in &t.premises {
        if let Some(missing) = t
            .conclusion
            .antecedent
            .support()
            .find(|f| !p.conclusion.antecedent.contains(f))
        {
            return Some((path.clone(), missing.clone()));
        }
    }
    for (i, p) in t.premises.iter().enumerate() {
        path.push(i);
        if let Some(found) = find_non_monotone(p, path) {
            return Some(found);
        }
        path.pop();
    }
    None
}

fn rewrite_at(
    t: &ProofTree,
    path: &[usize],
    f: &dyn Fn(&ProofTree) -> Result<ProofTree>,
) -> Result<ProofTree> {
    match path.split_first() {
        None => f(t),
        Some((&i, rest)) => {
            let mut out = t.clone();
            out.premises[i] = rewrite_at(&t.premises[i], rest, f)?;
            Ok(out)
        }
    }
}

/// Converts an `IELG++` proof into a monotone proof of the same end-sequent
/// by repeatedly fixing the first non-monotone instance: the missing formula
/// is propagated into the whole subtree above and a `(C)` node restores the
/// conclusion.
pub fn monotonize(t: &ProofTree) -> Result<ProofTree> {
    ensure_valid(CalculusId::IelgPlusPlus, t)?;
    let mut out = t.clone();
    // each pass fixes one (instance, formula) pair; the bound is generous
    for _ in 0..100_000 {
        let Some((path, a)) = find_non_monotone(&out, &mut Vec::new()) else {
            return Ok(out);
        };
        out = rewrite_at(&out, &path, &|node| {
            let fixed = add_formula(node, &a)?;
            Ok(ProofTree::node(
                RuleName::C,
                node.conclusion.clone(),
                Annotation::Contract(Multiset::singleton(a.clone())),
                vec![fixed],
            ))
        })?;
    }
    Err(internal("monotonization did not converge"))
}

// ---------------------------------------------------------------------------
// Set-normalization
// ---------------------------------------------------------------------------

/// Replaces every sequent of a monotone `IELG++` proof by its set form,
/// remapping or removing rules per the §7 case analysis. The depth never
/// increases and the root becomes the set form of the input root.
pub fn set_normalize(t: &ProofTree) -> Result<ProofTree> {
    ensure_valid(CalculusId::IelgPlusPlus, t)?;
    if !t.is_monotone() {
        return Err(bad("set normalization requires a monotone proof"));
    }
    set_norm(t)
}

fn set_norm(t: &ProofTree) -> Result<ProofTree> {
    let tset = t.conclusion.antecedent.support_set();
    let target: Multiset = tset.iter().cloned().collect();
    let goal = t.conclusion.goal.clone();
    let concl = Sequent::new(target.clone(), goal.clone());
    match t.rule {
        RuleName::Axiom => Ok(ProofTree::leaf(RuleName::Axiom, concl, t.annotation.clone())),
        RuleName::C => set_norm(&t.premises[0]),
        RuleName::AndR | RuleName::OrR1 | RuleName::OrR2 | RuleName::U => {
            let premises = t
                .premises
                .iter()
                .map(set_norm)
                .collect::<Result<Vec<_>>>()?;
            Ok(ProofTree::node(t.rule, concl, Annotation::None, premises))
        }
        RuleName::ImpR | RuleName::ImpRW => {
            let Formula::Implies(a, _) = &goal else {
                return Err(internal("ImpR with non-implication goal"));
            };
            let child = set_norm(&t.premises[0])?;
            let rule = if tset.contains(a) {
                RuleName::ImpRW
            } else {
                RuleName::ImpR
            };
            Ok(ProofTree::node(rule, concl, Annotation::None, vec![child]))
        }
        RuleName::AndL | RuleName::AndL1C | RuleName::AndL2C | RuleName::AndLC => {
            let Annotation::Principal(h) = &t.annotation else {
                return Err(internal("AndL without principal"));
            };
            let Formula::And(a, b) = h else {
                return Err(internal("AndL principal is not a conjunction"));
            };
            let child = set_norm(&t.premises[0])?;
            match (tset.contains(a), tset.contains(b)) {
                (true, true) => Ok(child),
                (true, false) => Ok(ProofTree::node(
                    RuleName::AndL1C,
                    concl,
                    t.annotation.clone(),
                    vec![child],
                )),
                (false, true) => Ok(ProofTree::node(
                    RuleName::AndL2C,
                    concl,
                    t.annotation.clone(),
                    vec![child],
                )),
                (false, false) => Ok(ProofTree::node(
                    RuleName::AndLC,
                    concl,
                    t.annotation.clone(),
                    vec![child],
                )),
            }
        }
        RuleName::OrL | RuleName::OrLC => {
            let Annotation::Principal(h) = &t.annotation else {
                return Err(internal("OrL without principal"));
            };
            let Formula::Or(a, b) = h else {
                return Err(internal("OrL principal is not a disjunction"));
            };
            if tset.contains(a) {
                set_norm(&t.premises[0])
            } else if tset.contains(b) {
                set_norm(&t.premises[1])
            } else {
                let c0 = set_norm(&t.premises[0])?;
                let c1 = set_norm(&t.premises[1])?;
                Ok(ProofTree::node(
                    RuleName::OrLC,
                    concl,
                    t.annotation.clone(),
                    vec![c0, c1],
                ))
            }
        }
        RuleName::ImpL | RuleName::ImpLC => {
            let Annotation::Principal(h) = &t.annotation else {
                return Err(internal("ImpL without principal"));
            };
            let Formula::Implies(_, b) = h else {
                return Err(internal("ImpL principal is not an implication"));
            };
            if tset.contains(b) {
                set_norm(&t.premises[1])
            } else {
                let c0 = set_norm(&t.premises[0])?;
                let c1 = set_norm(&t.premises[1])?;
                Ok(ProofTree::node(
                    RuleName::ImpLC,
                    concl,
                    t.annotation.clone(),
                    vec![c0, c1],
                ))
            }
        }
        RuleName::KI1 | RuleName::KI1W => {
            let child = set_norm(&t.premises[0])?;
            let delta_all = crate::sequent::k_prefix_set(&tset);
            let d1: Multiset = delta_all
                .iter()
                .filter(|b| tset.contains(b))
                .cloned()
                .collect();
            let d2: Multiset = delta_all
                .iter()
                .filter(|b| !tset.contains(b))
                .cloned()
                .collect();
            if d1.is_empty() {
                Ok(ProofTree::node(
                    RuleName::KI1,
                    concl,
                    Annotation::Delta(d2),
                    vec![child],
                ))
            } else {
                Ok(ProofTree::node(
                    RuleName::KI1W,
                    concl,
                    Annotation::DeltaSplit(d1, d2),
                    vec![child],
                ))
            }
        }
        _ => Err(bad(format!(
            "set normalization is defined for IELG++ proofs; found {}",
            t.rule
        ))),
    }
}
