//! Seeded random generation of formulas and of valid `IELG-`/`IELG++`
//! proofs, shared by the integration tests. Proof generation works forward:
//! a pool of axiom leaves is grown by randomly applying rule constructions,
//! re-checking validity after every step.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use ielg::transform;
use ielg::{
    check_proof, Annotation, CalculusId, Formula, Multiset, ProofTree, RuleName, Sequent,
};

const MAX_NODES: usize = 80;

pub struct Gen {
    rng: ChaCha8Rng,
    pool: Vec<ProofTree>,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        let mut g = Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pool: Vec::new(),
        };
        for _ in 0..8 {
            let ax = g.new_axiom();
            g.pool.push(ax);
        }
        g
    }

    pub fn random_atom(&mut self) -> Formula {
        match self.rng.gen_range(0..5) {
            0 | 1 => Formula::var("p"),
            2 | 3 => Formula::var("q"),
            _ => Formula::Bottom,
        }
    }

    /// A random formula with at most `connectives` connectives over
    /// `{p, q, ⊥, ∧, ∨, →, K}`.
    pub fn random_formula(&mut self, connectives: usize) -> Formula {
        if connectives == 0 || self.rng.gen_bool(0.3) {
            return self.random_atom();
        }
        match self.rng.gen_range(0..4) {
            0 => Formula::know(self.random_formula(connectives - 1)),
            1 => Formula::and(
                self.random_formula((connectives - 1) / 2),
                self.random_formula((connectives - 1) / 2),
            ),
            2 => Formula::or(
                self.random_formula((connectives - 1) / 2),
                self.random_formula((connectives - 1) / 2),
            ),
            _ => Formula::implies(
                self.random_formula((connectives - 1) / 2),
                self.random_formula((connectives - 1) / 2),
            ),
        }
    }

    fn random_context(&mut self) -> Multiset {
        let n = self.rng.gen_range(0..=2);
        (0..n).map(|_| self.random_formula(2)).collect()
    }

    fn new_axiom(&mut self) -> ProofTree {
        let principal = self.random_atom();
        let ante = self.random_context().plus(&principal);
        ProofTree::axiom(Sequent::new(ante, principal.clone()), principal)
    }

    fn pick(&mut self) -> ProofTree {
        let i = self.rng.gen_range(0..self.pool.len());
        self.pool[i].clone()
    }

    /// One occurrence of the antecedent, if any.
    fn pick_member(&mut self, ante: &Multiset) -> Option<Formula> {
        let n = ante.len();
        if n == 0 {
            return None;
        }
        let k = self.rng.gen_range(0..n);
        ante.iter().nth(k).cloned()
    }

    fn step(&mut self) -> Option<ProofTree> {
        let op = self.rng.gen_range(0..10);
        let t = self.pick();
        let ante = t.conclusion.antecedent.clone();
        let goal = t.conclusion.goal.clone();
        match op {
            0 => {
                let g = self.random_formula(2);
                transform::weaken(&t, &g).ok()
            }
            1 => {
                // AndL: consume two occurrences (distinct positions)
                if ante.len() < 2 {
                    return None;
                }
                let a = self.pick_member(&ante)?;
                let rest = ante.minus_one(&a)?;
                let b = self.pick_member(&rest)?;
                let f = Formula::and(a.clone(), b.clone());
                let conclusion = Sequent::new(rest.minus_one(&b)?.plus(&f), goal);
                Some(ProofTree::node(
                    RuleName::AndL,
                    conclusion,
                    Annotation::Principal(f),
                    vec![t],
                ))
            }
            2 => {
                // AndR over two pool proofs with equalized contexts
                let u = self.pick();
                let base = upper_bound(&ante, &u.conclusion.antecedent);
                let left = weaken_to(&t, &base)?;
                let right = weaken_to(&u, &base)?;
                let f = Formula::and(goal, u.conclusion.goal.clone());
                Some(ProofTree::node(
                    RuleName::AndR,
                    Sequent::new(base, f),
                    Annotation::None,
                    vec![left, right],
                ))
            }
            3 => {
                let b = self.random_formula(2);
                let (rule, f) = if self.rng.gen_bool(0.5) {
                    (RuleName::OrR1, Formula::or(goal, b))
                } else {
                    (RuleName::OrR2, Formula::or(b, goal))
                };
                Some(ProofTree::node(
                    rule,
                    Sequent::new(ante, f),
                    Annotation::None,
                    vec![t],
                ))
            }
            4 => {
                // OrL over two pool proofs with the same goal
                let u = self
                    .pool
                    .iter()
                    .filter(|c| c.conclusion.goal == goal)
                    .choose(&mut self.rng)?
                    .clone();
                let a = self.pick_member(&ante)?;
                let b = self.pick_member(&u.conclusion.antecedent.clone())?;
                let base = upper_bound(
                    &ante.minus_one(&a)?,
                    &u.conclusion.antecedent.minus_one(&b)?,
                );
                let f = Formula::or(a.clone(), b.clone());
                let left = weaken_to(&t, &base.plus(&a))?;
                let right = weaken_to(&u, &base.plus(&b))?;
                Some(ProofTree::node(
                    RuleName::OrL,
                    Sequent::new(base.plus(&f), goal),
                    Annotation::Principal(f),
                    vec![left, right],
                ))
            }
            5 => {
                let a = self.pick_member(&ante)?;
                Some(ProofTree::node(
                    RuleName::ImpR,
                    Sequent::new(ante.minus_one(&a)?, Formula::implies(a, goal)),
                    Annotation::None,
                    vec![t],
                ))
            }
            6 => {
                // ImpL: t proves the antecedent premise, u hosts B
                let u = self.pick();
                let b = self.pick_member(&u.conclusion.antecedent.clone())?;
                let f = Formula::implies(goal.clone(), b.clone());
                let base = upper_bound(&ante, &u.conclusion.antecedent.minus_one(&b)?);
                let left = weaken_to(&t, &base.plus(&f))?;
                let right = weaken_to(&u, &base.plus(&b))?;
                let c_goal = u.conclusion.goal.clone();
                Some(ProofTree::node(
                    RuleName::ImpL,
                    Sequent::new(base.plus(&f), c_goal),
                    Annotation::Principal(f),
                    vec![left, right],
                ))
            }
            7 | 8 => {
                // extended K-introduction with a random Γ₁/Γ₂ split
                let mut gamma1 = Multiset::new();
                let mut gamma2 = Multiset::new();
                for f in ante.iter() {
                    if self.rng.gen_bool(0.5) {
                        gamma1.insert(f.clone());
                    } else {
                        gamma2.insert(f.clone());
                    }
                }
                transform::ki_ext(&t, &gamma1, &Multiset::new(), &gamma2).ok()
            }
            _ => {
                // (U) under any pool proof of K⊥
                let kbot = Formula::know(Formula::Bottom);
                let u = self
                    .pool
                    .iter()
                    .filter(|c| c.conclusion.goal == kbot)
                    .choose(&mut self.rng)?
                    .clone();
                let f = self.random_formula(2);
                if f == kbot {
                    return None;
                }
                let u_ante = u.conclusion.antecedent.clone();
                Some(ProofTree::node(
                    RuleName::U,
                    Sequent::new(u_ante, f),
                    Annotation::None,
                    vec![u],
                ))
            }
        }
    }

    /// The next generated valid `IELG-` proof.
    pub fn next_minus_proof(&mut self) -> ProofTree {
        loop {
            if let Some(t) = self.step() {
                if t.node_count() > MAX_NODES {
                    continue;
                }
                let v = check_proof(CalculusId::IelgMinus, &t);
                assert!(v.is_valid(), "generator produced an invalid proof: {v}");
                self.pool.push(t.clone());
                if self.pool.len() > 64 {
                    self.pool.remove(0);
                }
                return t;
            }
        }
    }

    /// The next generated valid `IELG++` proof: a generated `IELG-` proof,
    /// sometimes wrapped in an explicit contraction node.
    pub fn next_pp_proof(&mut self) -> ProofTree {
        let t = self.next_minus_proof();
        let dup = t
            .conclusion
            .antecedent
            .counts()
            .find(|(_, n)| *n >= 2)
            .map(|(f, _)| f.clone());
        let out = match dup {
            Some(f) if self.rng.gen_bool(0.7) => ProofTree::node(
                RuleName::C,
                Sequent::new(
                    t.conclusion.antecedent.minus_one(&f).unwrap(),
                    t.conclusion.goal.clone(),
                ),
                Annotation::Contract(Multiset::singleton(f)),
                vec![t],
            ),
            _ => t,
        };
        let v = check_proof(CalculusId::IelgPlusPlus, &out);
        assert!(v.is_valid(), "generator produced an invalid ++ proof: {v}");
        out
    }
}

/// Pointwise maximum of two multisets.
fn upper_bound(a: &Multiset, b: &Multiset) -> Multiset {
    let mut out = a.clone();
    for (f, n) in b.counts() {
        let have = out.multiplicity(f);
        if have < n {
            out.insert_n(f.clone(), n - have);
        }
    }
    out
}

/// Weakens `t` until its antecedent equals `target` (which must include it).
fn weaken_to(t: &ProofTree, target: &Multiset) -> Option<ProofTree> {
    let missing = target.checked_sub(&t.conclusion.antecedent)?;
    let mut out = t.clone();
    for g in missing.iter() {
        out = transform::weaken(&out, g).ok()?;
    }
    Some(out)
}
