//! The decision procedure: normalize both transducers, align them into a
//! pair grammar over a doubled output alphabet, and check that the two
//! projection morphisms agree on the whole pair language. The decision path
//! propagates per-nonterminal conjugacy constraints, which is polynomial; a
//! bounded test-set enumeration is kept as an independent reference check.

use std::collections::HashMap;
use std::rc::Rc;

use crate::domain::AbstractLang;
use crate::dta::{Dta, DtaStateId};
use crate::group::GroupWord;
use crate::normalize::{order_transducer, Normalized, OrderedTransducer};
use crate::transducer::{Axiom, Rhs, StateId, Transducer};
use crate::tree::{SymbolId, Tree};
use crate::Error;

#[derive(Clone, Debug)]
pub struct EquivConfig {
    /// How often each nonterminal may occur on a root-to-leaf path of an
    /// enumerated derivation.
    pub bound: usize,
    /// Hard cap on the number of enumerated derivation values.
    pub test_set_cap: usize,
    /// Depth bound for the fallback witness search.
    pub search_depth: usize,
}

impl Default for EquivConfig {
    fn default() -> Self {
        EquivConfig {
            bound: 2,
            test_set_cap: 100_000,
            search_depth: 4,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Verdict {
    Equivalent,
    /// `witness` is `None` when the bounded search found no concrete
    /// separating tree although a structural difference proves inequivalence.
    Inequivalent {
        witness: Option<(Tree, GroupWord, GroupWord)>,
    },
    EmptyDomain,
}

/// One grammar production: alternating constant pairs and nonterminals,
/// `consts.len() == nts.len() + 1`. The first component of each constant
/// pair comes from the left transducer, the second from the right one.
#[derive(Clone, Debug)]
struct Production {
    consts: Vec<(GroupWord, GroupWord)>,
    nts: Vec<usize>,
    symbol: SymbolId,
    dta_children: Vec<DtaStateId>,
    /// 1-based input child read by each nonterminal occurrence.
    child_of_nt: Vec<usize>,
}

/// The pair grammar of two same-ordered transducers. Nonterminals are
/// coreachable state pairs; the start data wraps the pair of axioms.
pub struct PairGrammar {
    prods: Vec<Vec<Production>>,
    /// The coreachable state pair behind each nonterminal.
    pairs: Vec<(StateId, StateId)>,
    start: usize,
    axiom_consts: ((GroupWord, GroupWord), (GroupWord, GroupWord)),
}

enum GrammarOutcome {
    NotSameOrdered,
    Grammar(PairGrammar),
}

fn build_grammar(a: &OrderedTransducer, c: &OrderedTransducer) -> Result<GrammarOutcome, Error> {
    let ((pa, qa, sa), (pc, qc, sc)) = match (a.m.axiom(), c.m.axiom()) {
        (
            Axiom::Wrapped {
                prefix: pa,
                state: qa,
                suffix: sa,
            },
            Axiom::Wrapped {
                prefix: pc,
                state: qc,
                suffix: sc,
            },
        ) => ((pa, *qa, sa), (pc, *qc, sc)),
        _ => {
            return Err(Error::InvariantViolation(
                "pair grammar needs two non-constant axioms".into(),
            ))
        }
    };
    let mut pairs: Vec<(StateId, StateId)> = vec![(qa, qc)];
    let mut index: HashMap<(StateId, StateId), usize> = HashMap::new();
    index.insert((qa, qc), 0);
    let mut prods: Vec<Vec<Production>> = Vec::new();
    let mut done = 0;
    while done < pairs.len() {
        let (q, r) = pairs[done];
        done += 1;
        let mut alts = Vec::new();
        for f in a.m.input().symbols() {
            let (la, ca, lc, cc) = match (a.m.rule(q, f), c.m.rule(r, f)) {
                (Rhs::Bottom, Rhs::Bottom) => continue,
                (
                    Rhs::Expr {
                        lead: la,
                        calls: ca,
                    },
                    Rhs::Expr {
                        lead: lc,
                        calls: cc,
                    },
                ) => (la, ca, lc, cc),
                _ => return Ok(GrammarOutcome::NotSameOrdered),
            };
            if ca.len() != cc.len()
                || ca.iter().zip(cc).any(|(x, y)| x.child != y.child)
            {
                return Ok(GrammarOutcome::NotSameOrdered);
            }
            let mut consts = vec![(la.clone(), lc.clone())];
            let mut nts = Vec::new();
            let mut child_of_nt = Vec::new();
            for (x, y) in ca.iter().zip(cc) {
                let key = (x.state, y.state);
                let id = *index.entry(key).or_insert_with(|| {
                    pairs.push(key);
                    pairs.len() - 1
                });
                nts.push(id);
                child_of_nt.push(x.child);
                consts.push((x.suffix.clone(), y.suffix.clone()));
            }
            let dta_children = a
                .b
                .delta(a.iota.get(q), f)
                .ok_or_else(|| {
                    Error::InvariantViolation(
                        "live rule without a domain transition".into(),
                    )
                })?
                .to_vec();
            alts.push(Production {
                consts,
                nts,
                symbol: f,
                dta_children,
                child_of_nt,
            });
        }
        prods.push(alts);
    }
    Ok(GrammarOutcome::Grammar(PairGrammar {
        prods,
        pairs,
        start: 0,
        axiom_consts: ((pa.clone(), sa.clone()), (pc.clone(), sc.clone())),
    }))
}

/// Whether the two constraints `f(x) = P·g(x)·Q` and `f(x) = P'·g(x)·Q'`
/// agree on every `g(x)` in the concretization of `abs`. Rearranging, this
/// asks for `g(x)⁻·s·g(x) = t` with `s = P⁻·P'` and `t = Q·Q'⁻` throughout
/// the abstract language, which each lattice shape settles exactly.
fn constraints_consistent(
    stored: &(GroupWord, GroupWord),
    cand: &(GroupWord, GroupWord),
    abs: &AbstractLang,
) -> bool {
    let s = stored.0.invert().concat(&cand.0);
    let t = stored.1.concat(&cand.1.invert());
    match abs {
        AbstractLang::Empty => true,
        AbstractLang::Singleton(v) => v.invert().concat(&s).concat(v) == t,
        AbstractLang::Periodic(coset) => {
            // over a full coset, conjugates by v·p^k all coincide exactly
            // when v⁻·s·v equals t and commutes with the period
            let c = coset.rep().invert().concat(&s).concat(coset.rep());
            c == t && c.concat(coset.period()) == coset.period().concat(&c)
        }
        AbstractLang::Top => s.is_empty() && t.is_empty(),
    }
}

/// Decides whether the two projection morphisms agree on the whole pair
/// language by propagating, per nonterminal `⟨q,q'⟩`, a constraint
/// `f(w) = P·g(w)·Q` for all its derivations `w`.
///
/// Fixing all children of a production but one at default derivations turns
/// the parent constraint into a candidate constraint for the varying child;
/// an induction over the children shows the single-variation instances
/// already imply the full production equation. Candidate constraints for an
/// already-constrained nonterminal need not be syntactically equal, only
/// pointwise interchangeable on the child's output language, which the
/// exact abstraction of the right transducer decides.
fn constraints_agree(
    grammar: &PairGrammar,
    a: &OrderedTransducer,
    c: &OrderedTransducer,
) -> Result<bool, Error> {
    let n = grammar.prods.len();
    let mut defaults = Vec::with_capacity(n);
    for &(q, r) in &grammar.pairs {
        let t = a.b.min_tree(a.iota.get(q))?;
        let dl = a.m.eval_state(q, &t, 0)?;
        let dr = c.m.eval_state(r, &t, 0)?;
        defaults.push((dl, dr));
    }
    let ((pa, sa), (pc, sc)) = &grammar.axiom_consts;
    let mut constraints: Vec<Option<(GroupWord, GroupWord)>> = vec![None; n];
    constraints[grammar.start] = Some((pa.invert().concat(pc), sc.concat(&sa.invert())));
    let mut queue = vec![grammar.start];
    while let Some(x) = queue.pop() {
        let (p, q) = constraints[x].clone().unwrap();
        let (dl, dr) = &defaults[x];
        if dl != &p.concat(dr).concat(&q) {
            return Ok(false);
        }
        for prod in &grammar.prods[x] {
            if prod.nts.is_empty() {
                if prod.consts[0].0 != p.concat(&prod.consts[0].1).concat(&q) {
                    return Ok(false);
                }
                continue;
            }
            for i in 0..prod.nts.len() {
                // left and right words around child i, all other children
                // fixed at their defaults; the parent constraint wraps the
                // right-hand side
                let mut before_l = prod.consts[0].0.clone();
                let mut before_r = p.concat(&prod.consts[0].1);
                for j in 0..i {
                    let (jl, jr) = &defaults[prod.nts[j]];
                    before_l = before_l.concat(jl).concat(&prod.consts[j + 1].0);
                    before_r = before_r.concat(jr).concat(&prod.consts[j + 1].1);
                }
                let mut after_l = prod.consts[i + 1].0.clone();
                let mut after_r = prod.consts[i + 1].1.clone();
                for j in i + 1..prod.nts.len() {
                    let (jl, jr) = &defaults[prod.nts[j]];
                    after_l = after_l.concat(jl).concat(&prod.consts[j + 1].0);
                    after_r = after_r.concat(jr).concat(&prod.consts[j + 1].1);
                }
                let after_r = after_r.concat(&q);
                let cand = (
                    before_l.invert().concat(&before_r),
                    after_r.concat(&after_l.invert()),
                );
                let child = prod.nts[i];
                match &constraints[child] {
                    None => {
                        constraints[child] = Some(cand);
                        queue.push(child);
                    }
                    Some(stored) => {
                        let abs = c.analysis.get(grammar.pairs[child].1);
                        if !constraints_consistent(stored, &cand, abs) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// One enumerated derivation: the left projection, the right projection and
/// a concrete input tree realizing the derivation.
type Deriv = (GroupWord, GroupWord, Tree);

struct Enumerator<'a> {
    grammar: &'a PairGrammar,
    alphabet_rank: Vec<usize>,
    min_trees: Vec<Tree>,
    memo: HashMap<(usize, Vec<u8>), Rc<Vec<Deriv>>>,
    produced: usize,
    cap: usize,
}

impl Enumerator<'_> {
    fn expand(&mut self, nt: usize, counts: &[u8]) -> Result<Rc<Vec<Deriv>>, Error> {
        let key = (nt, counts.to_vec());
        if let Some(cached) = self.memo.get(&key) {
            return Ok(Rc::clone(cached));
        }
        let mut seen: HashMap<(GroupWord, GroupWord), ()> = HashMap::new();
        let mut out: Vec<Deriv> = Vec::new();
        let grammar = self.grammar;
        for prod in &grammar.prods[nt] {
            let mut child_sets: Vec<Rc<Vec<Deriv>>> = Vec::with_capacity(prod.nts.len());
            let mut feasible = true;
            for &child in &prod.nts {
                if counts[child] == 0 {
                    feasible = false;
                    break;
                }
                let mut sub = counts.to_vec();
                sub[child] -= 1;
                child_sets.push(self.expand(child, &sub)?);
            }
            if !feasible || child_sets.iter().any(|s| s.is_empty()) {
                continue;
            }
            let mut combos: Vec<(GroupWord, GroupWord, Vec<Tree>)> = vec![(
                prod.consts[0].0.clone(),
                prod.consts[0].1.clone(),
                Vec::new(),
            )];
            // Two partial derivations with equal projection pairs admit
            // exactly the same extensions, so one representative per pair
            // suffices; dedup at every stage keeps the cross product from
            // exploding, and the budget is charged per visited combination.
            for (i, set) in child_sets.iter().enumerate() {
                let mut next = Vec::new();
                let mut stage_seen: HashMap<(GroupWord, GroupWord), ()> = HashMap::new();
                for (pl, br, trees) in &combos {
                    for (cpl, cbr, ctree) in set.iter() {
                        self.produced += 1;
                        if self.produced > self.cap {
                            return Err(Error::TestSetCap { cap: self.cap });
                        }
                        let pl2 = pl.concat(cpl).concat(&prod.consts[i + 1].0);
                        let br2 = br.concat(cbr).concat(&prod.consts[i + 1].1);
                        if stage_seen.insert((pl2.clone(), br2.clone()), ()).is_some() {
                            continue;
                        }
                        let mut trees2 = trees.clone();
                        trees2.push(ctree.clone());
                        next.push((pl2, br2, trees2));
                    }
                }
                combos = next;
            }
            for (pl, br, subtrees) in combos {
                if seen.insert((pl.clone(), br.clone()), ()).is_some() {
                    continue;
                }
                let rank = self.alphabet_rank[prod.symbol.0];
                let mut children: Vec<Option<Tree>> = vec![None; rank];
                for (slot, sub) in prod.child_of_nt.iter().zip(subtrees) {
                    children[slot - 1] = Some(sub);
                }
                let children = children
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| {
                        c.unwrap_or_else(|| self.min_trees[prod.dta_children[i].0].clone())
                    })
                    .collect();
                out.push((
                    pl,
                    br,
                    Tree {
                        symbol: prod.symbol,
                        children,
                    },
                ));
            }
        }
        let rc = Rc::new(out);
        self.memo.insert(key, Rc::clone(&rc));
        Ok(rc)
    }
}

/// Enumerates the bounded test set of the pair grammar and returns the
/// first derivation on which the two projections differ, if any. The
/// returned words include the axiom constants.
pub fn morphisms_agree(
    grammar: &PairGrammar,
    b: &Dta,
    ranks: Vec<usize>,
    config: &EquivConfig,
) -> Result<Option<Deriv>, Error> {
    let mut min_trees = Vec::with_capacity(b.num_states());
    for h in 0..b.num_states() {
        min_trees.push(b.min_tree(DtaStateId(h))?);
    }
    let bound = config.bound.min(u8::MAX as usize) as u8;
    let mut counts = vec![bound; grammar.prods.len()];
    counts[grammar.start] -= 1;
    let mut en = Enumerator {
        grammar,
        alphabet_rank: ranks,
        min_trees,
        memo: HashMap::new(),
        produced: 0,
        cap: config.test_set_cap,
    };
    let derivs = en.expand(grammar.start, &counts)?;
    let ((pa, sa), (pc, sc)) = &grammar.axiom_consts;
    for (pl, br, tree) in derivs.iter() {
        let left = pa.concat(pl).concat(sa);
        let right = pc.concat(br).concat(sc);
        if left != right {
            return Ok(Some((left, right, tree.clone())));
        }
    }
    Ok(None)
}

/// Searches the bounded domain enumeration for a tree on which the two
/// transducers disagree.
fn search_witness(
    a: &Transducer,
    c: &Transducer,
    b: &Dta,
    depth: usize,
) -> Result<Option<(Tree, GroupWord, GroupWord)>, Error> {
    // shallowest witnesses first, so reported trees are minimal
    for d in 1..=depth {
        for t in b.enum_trees(b.start(), d) {
            if t.depth() + 1 < d {
                continue;
            }
            let left = a.eval(&t)?;
            let right = c.eval(&t)?;
            if left != right {
                return Ok(Some((t, left, right)));
            }
        }
    }
    Ok(None)
}

/// Decides whether `a` and `c` agree on every tree accepted by `b`.
pub fn decide_equiv(
    a: &Transducer,
    c: &Transducer,
    b: &Dta,
    config: &EquivConfig,
) -> Result<Verdict, Error> {
    if a.input() != c.input() || a.output() != c.output() {
        return Err(Error::AlphabetMismatch);
    }
    let orda = match order_transducer(a, b)? {
        Normalized::EmptyDomain => return Ok(Verdict::EmptyDomain),
        Normalized::Ready(o) => o,
    };
    let ordc = match order_transducer(c, b)? {
        Normalized::EmptyDomain => return Ok(Verdict::EmptyDomain),
        Normalized::Ready(o) => o,
    };
    let rb = &orda.b;
    match (orda.m.axiom(), ordc.m.axiom()) {
        (Axiom::Constant(u), Axiom::Constant(v)) => {
            if u == v {
                Ok(Verdict::Equivalent)
            } else {
                let t = rb.min_tree(rb.start())?;
                Ok(Verdict::Inequivalent {
                    witness: Some((t, u.clone(), v.clone())),
                })
            }
        }
        (Axiom::Constant(_), Axiom::Wrapped { .. })
        | (Axiom::Wrapped { .. }, Axiom::Constant(_)) => {
            // a surviving axiom state has at least two distinct outputs, so
            // the transducers cannot agree with a constant one
            Ok(Verdict::Inequivalent {
                witness: search_witness(a, c, rb, config.search_depth)?,
            })
        }
        (Axiom::Wrapped { .. }, Axiom::Wrapped { .. }) => {
            let grammar = match build_grammar(&orda, &ordc)? {
                GrammarOutcome::NotSameOrdered => {
                    return Ok(Verdict::Inequivalent {
                        witness: search_witness(a, c, rb, config.search_depth)?,
                    })
                }
                GrammarOutcome::Grammar(g) => g,
            };
            if constraints_agree(&grammar, &orda, &ordc)? {
                Ok(Verdict::Equivalent)
            } else {
                Ok(Verdict::Inequivalent {
                    witness: search_witness(a, c, rb, config.search_depth)?,
                })
            }
        }
    }
}
