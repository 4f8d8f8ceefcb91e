//! Differential-testing support: a brute-force oracle, seeded random
//! instance generation, and equivalence-preserving / likely-breaking
//! mutations.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::domain::{analyze, AbstractLang};
use crate::dta::{Dta, DtaStateId};
use crate::group::{GroupWord, OutputAlphabet, SignedLetter};
use crate::normalize::{make_compatible, periodic_spans, permute_rhs};
use crate::transducer::{Axiom, Call, CompatibleMap, Rhs, StateId, Transducer};
use crate::tree::{RankedAlphabet, SymbolId, Tree};
use crate::Error;

/// All reduced words of exactly `len` letters over the given generators.
pub fn all_reduced_words(gens: &[char], len: usize) -> Vec<GroupWord> {
    let letters: Vec<SignedLetter> = gens
        .iter()
        .flat_map(|&c| [SignedLetter::pos(c), SignedLetter::neg(c)])
        .collect();
    let mut cur = vec![GroupWord::empty()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(cur.len() * letters.len());
        for w in &cur {
            for &l in &letters {
                if w.letters().last().map(|p| p.cancels(l)) != Some(true) {
                    let mut ls = w.letters().to_vec();
                    ls.push(l);
                    next.push(GroupWord::from_letters(ls));
                }
            }
        }
        cur = next;
    }
    cur
}

/// Parameters for seeded instance generation. Generation is a pure function
/// of this struct.
#[derive(Clone, Debug)]
pub struct GenParams {
    pub seed: u64,
    pub max_states: usize,
    pub max_rank: usize,
    pub input_symbols: usize,
    pub output_gens: usize,
    pub max_word_len: usize,
    pub max_dta_states: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            max_states: 5,
            max_rank: 2,
            input_symbols: 3,
            output_gens: 2,
            max_word_len: 4,
            max_dta_states: 3,
        }
    }
}

fn rand_word(rng: &mut ChaCha8Rng, letters: &[char], max_len: usize) -> GroupWord {
    let len = rng.gen_range(0..=max_len);
    let raw: Vec<SignedLetter> = (0..len)
        .map(|_| {
            let c = letters[rng.gen_range(0..letters.len())];
            if rng.gen_bool(0.5) {
                SignedLetter::pos(c)
            } else {
                SignedLetter::neg(c)
            }
        })
        .collect();
    GroupWord::reduce(raw)
}

fn rand_nonempty_word(rng: &mut ChaCha8Rng, letters: &[char], max_len: usize) -> GroupWord {
    loop {
        let w = rand_word(rng, letters, max_len.max(1));
        if !w.is_empty() {
            return w;
        }
    }
}

/// A random reduced domain automaton with a nonempty language; every state
/// keeps at least one nullary transition.
fn gen_dta(rng: &mut ChaCha8Rng, input: &RankedAlphabet, max_states: usize) -> Dta {
    let n = rng.gen_range(1..=max_states);
    let nullary: Vec<SymbolId> = input.symbols().filter(|&f| input.rank(f) == 0).collect();
    let mut delta: BTreeMap<(DtaStateId, SymbolId), Vec<DtaStateId>> = BTreeMap::new();
    for h in 0..n {
        for f in input.symbols() {
            let rank = input.rank(f);
            let keep = if rank == 0 {
                rng.gen_bool(0.7)
            } else {
                rng.gen_bool(0.6)
            };
            if keep {
                let hs = (0..rank).map(|_| DtaStateId(rng.gen_range(0..n))).collect();
                delta.insert((DtaStateId(h), f), hs);
            }
        }
        let forced = nullary[rng.gen_range(0..nullary.len())];
        delta.entry((DtaStateId(h), forced)).or_insert_with(Vec::new);
    }
    let names = (0..n).map(|h| format!("h{h}")).collect();
    let d = Dta::new(names, DtaStateId(0), delta).expect("generated states are in range");
    d.reduce().expect("every state has a nullary transition")
}

/// Generates a transducer together with the domain automaton and the
/// compatible map it was built against.
pub fn gen_instance_with_map(p: &GenParams) -> (Transducer, Dta, CompatibleMap) {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    // input alphabet with at least one nullary symbol
    let nsym = rng.gen_range(1..=p.input_symbols);
    let mut ranks: Vec<usize> = (0..nsym).map(|_| rng.gen_range(0..=p.max_rank)).collect();
    if !ranks.contains(&0) {
        let i = rng.gen_range(0..nsym);
        ranks[i] = 0;
    }
    let input = RankedAlphabet::new(
        ranks
            .iter()
            .enumerate()
            .map(|(i, &r)| (format!("s{i}"), r))
            .collect(),
    )
    .expect("generated symbol names are unique");
    let letters: Vec<char> = ('a'..='z').take(p.output_gens.max(1)).collect();
    let output = OutputAlphabet::new(letters.iter().copied()).expect("distinct letters");

    let b = gen_dta(&mut rng, &input, p.max_dta_states.max(1));

    let nst = rng.gen_range(1..=p.max_states.max(1));
    let mut iota = vec![b.start()];
    for _ in 1..nst {
        iota.push(DtaStateId(rng.gen_range(0..b.num_states())));
    }
    // bias some states toward outputs that are powers of one short word
    let period: Vec<Option<GroupWord>> = (0..nst)
        .map(|_| {
            if rng.gen_bool(0.3) {
                Some(rand_nonempty_word(&mut rng, &letters, 2))
            } else {
                None
            }
        })
        .collect();
    let word = |rng: &mut ChaCha8Rng, q: usize| match &period[q] {
        Some(w) if rng.gen_bool(0.7) => w.pow(rng.gen_range(0..=2)),
        _ => rand_word(rng, &letters, p.max_word_len),
    };

    let mut rules = Vec::with_capacity(nst);
    for q in 0..nst {
        let mut row = Vec::with_capacity(input.len());
        for f in input.symbols() {
            let hs = match b.delta(iota[q], f) {
                None => {
                    row.push(Rhs::Bottom);
                    continue;
                }
                Some(hs) => hs.to_vec(),
            };
            let lead = word(&mut rng, q);
            let mut children: Vec<usize> = (1..=hs.len()).collect();
            children.shuffle(&mut rng);
            let mut calls = Vec::new();
            for c in children {
                let candidates: Vec<usize> =
                    (0..nst).filter(|&r| iota[r] == hs[c - 1]).collect();
                if candidates.is_empty() || !rng.gen_bool(0.6) {
                    continue;
                }
                let target = candidates[rng.gen_range(0..candidates.len())];
                calls.push(Call {
                    state: StateId(target),
                    child: c,
                    suffix: word(&mut rng, q),
                });
            }
            row.push(Rhs::Expr { lead, calls });
        }
        rules.push(row);
    }
    let axiom = Axiom::Wrapped {
        prefix: rand_word(&mut rng, &letters, 2),
        state: StateId(0),
        suffix: rand_word(&mut rng, &letters, 2),
    };
    let names = (0..nst).map(|q| format!("q{q}")).collect();
    let m = Transducer::new(input, output, names, axiom, rules)
        .expect("generated rules are well formed");
    (m, b, CompatibleMap::new(iota))
}

pub fn gen_instance(p: &GenParams) -> (Transducer, Dta) {
    let (m, b, _) = gen_instance_with_map(p);
    (m, b)
}

/// Result of the depth-bounded oracle. `NoWitness` explicitly records the
/// horizon: it means "no difference up to that depth", not equivalence.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OracleOutcome {
    EmptyDomain,
    NoWitness {
        depth: usize,
    },
    Witness {
        tree: Tree,
        left: GroupWord,
        right: GroupWord,
    },
}

/// Compares the two transducers on every accepted tree of depth below
/// `max_depth`, in deterministic enumeration order.
pub fn brute_force_equiv(
    a: &Transducer,
    c: &Transducer,
    b: &Dta,
    max_depth: usize,
) -> Result<OracleOutcome, Error> {
    let rb = match b.reduce() {
        None => return Ok(OracleOutcome::EmptyDomain),
        Some(rb) => rb,
    };
    for t in rb.enum_trees(rb.start(), max_depth) {
        let left = a.eval(&t)?;
        let right = c.eval(&t)?;
        if left != right {
            return Ok(OracleOutcome::Witness { tree: t, left, right });
        }
    }
    Ok(OracleOutcome::NoWitness { depth: max_depth })
}

/// Produces a transducer equivalent to `m` relative to `b` by construction.
/// Works on the compatible product and applies one of: inserting a
/// cancelling pair into a rule word, permuting a periodic call segment with
/// recomputed connectors, or shifting a constant across a call to a
/// singleton-valued state. Falls back to the plain product when no site
/// applies.
pub fn mutate_preserving(m: &Transducer, b: &Dta, seed: u64) -> Result<Transducer, Error> {
    let rb = match b.reduce() {
        None => return Ok(m.clone()),
        Some(rb) => rb,
    };
    let (mc, iota) = make_compatible(m, &rb)?;
    if mc.num_states() == 0 {
        return Ok(mc);
    }
    let analysis = analyze(&mc, &rb, &iota)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters: Vec<char> = mc.output().letters().to_vec();

    // collect applicable sites per mutation kind
    let mut segment_sites = Vec::new();
    let mut shift_sites = Vec::new();
    let mut word_sites = Vec::new();
    for q in mc.states() {
        for f in mc.input().symbols() {
            if let Rhs::Expr { calls, .. } = mc.rule(q, f) {
                word_sites.push((q, f));
                for (i, call) in calls.iter().enumerate() {
                    if matches!(analysis.get(call.state), AbstractLang::Singleton(_)) {
                        shift_sites.push((q, f, i));
                    }
                }
                for span in periodic_spans(calls, &analysis)? {
                    segment_sites.push((q, f, span));
                }
            }
        }
    }

    let choice = rng.gen_range(0..3);
    if choice == 0 && !segment_sites.is_empty() {
        let (q, f, span) = segment_sites[rng.gen_range(0..segment_sites.len())].clone();
        let mut order: Vec<usize> = (0..=(span.1 - span.0)).collect();
        order.shuffle(&mut rng);
        let rhs = permute_rhs(mc.rule(q, f), &analysis, span, &order)?;
        return mc.with_rule(q, f, rhs);
    }
    if choice == 1 && !shift_sites.is_empty() {
        let (q, f, i) = shift_sites[rng.gen_range(0..shift_sites.len())];
        let (lead, calls) = match mc.rule(q, f) {
            Rhs::Expr { lead, calls } => (lead.clone(), calls.clone()),
            Rhs::Bottom => unreachable!("site was collected from a live rule"),
        };
        let w = match analysis.get(calls[i].state) {
            AbstractLang::Singleton(w) => w.clone(),
            _ => unreachable!("site was collected as a singleton"),
        };
        // u q(x) v becomes q(x) (w- u w) v when q always outputs w
        let u = if i == 0 {
            lead.clone()
        } else {
            calls[i - 1].suffix.clone()
        };
        let shifted = w.invert().concat(&u).concat(&w);
        let mut calls = calls;
        calls[i].suffix = shifted.concat(&calls[i].suffix);
        let lead = if i == 0 { GroupWord::empty() } else { lead };
        let mut calls2 = calls;
        if i > 0 {
            calls2[i - 1].suffix = GroupWord::empty();
        }
        return mc.with_rule(q, f, Rhs::Expr { lead, calls: calls2 });
    }
    if !word_sites.is_empty() {
        // cancelling-pair insertion: a no-op on reduced words, kept as the
        // always-applicable fallback
        let (q, f) = word_sites[rng.gen_range(0..word_sites.len())];
        let (lead, calls) = match mc.rule(q, f) {
            Rhs::Expr { lead, calls } => (lead.clone(), calls.clone()),
            Rhs::Bottom => unreachable!("site was collected from a live rule"),
        };
        let w = rand_nonempty_word(&mut rng, &letters, 2);
        let lead = lead.concat(&w).concat(&w.invert());
        return mc.with_rule(q, f, Rhs::Expr { lead, calls });
    }
    Ok(mc)
}

/// Appends one random generator to one random rule word of `m`. Likely to
/// break equivalence; the caller must confirm with the oracle since the
/// mutated site may be unreachable on the domain.
pub fn mutate_breaking(m: &Transducer, seed: u64) -> Transducer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = m.output().letters().to_vec();
    let extra = GroupWord::from_letters(vec![SignedLetter::pos(
        letters[rng.gen_range(0..letters.len())],
    )]);
    let mut sites = Vec::new();
    for q in m.states() {
        for f in m.input().symbols() {
            if let Rhs::Expr { calls, .. } = m.rule(q, f) {
                for slot in 0..=calls.len() {
                    sites.push((q, f, slot));
                }
            }
        }
    }
    if sites.is_empty() {
        let axiom = match m.axiom() {
            Axiom::Constant(u) => Axiom::Constant(u.concat(&extra)),
            Axiom::Wrapped {
                prefix,
                state,
                suffix,
            } => Axiom::Wrapped {
                prefix: prefix.clone(),
                state: *state,
                suffix: suffix.concat(&extra),
            },
        };
        return m.with_axiom(axiom).expect("axiom stays well formed");
    }
    let (q, f, slot) = sites[rng.gen_range(0..sites.len())];
    let (lead, mut calls) = match m.rule(q, f) {
        Rhs::Expr { lead, calls } => (lead.clone(), calls.clone()),
        Rhs::Bottom => unreachable!("site was collected from a live rule"),
    };
    let lead = if slot == 0 {
        lead.concat(&extra)
    } else {
        calls[slot - 1].suffix = calls[slot - 1].suffix.concat(&extra);
        lead
    };
    m.with_rule(q, f, Rhs::Expr { lead, calls })
        .expect("rule stays well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmt::{parse_dta, parse_transducer};
    use crate::transducer::check_compatible;

    const EXAMPLE_LT: &str = "\
alphabet f:2 g:1 k:0
output a b
axiom _ q0 _
rule q0 f -> _ q1:2 b q2:1 _
rule q0 g -> _ q0:1 _
rule q0 k -> _
rule q1 f -> _ q0:1 _ q0:2 _
rule q1 g -> ab q1:1 _
rule q1 k -> a
rule q2 f -> _ q0:1 _ q0:2 _
rule q2 g -> ab q2:1 _
rule q2 k -> ab
";

    const EXAMPLE_DTA: &str =
        "dta start h0\ndelta h0 f -> h1 h1\ndelta h1 g -> h1\ndelta h1 k ->\n";

    fn example() -> (Transducer, Dta) {
        let m = parse_transducer(EXAMPLE_LT, "test").unwrap();
        let b = parse_dta(EXAMPLE_DTA, m.input(), "test").unwrap();
        (m, b)
    }

    #[test]
    fn reduced_word_counts() {
        assert_eq!(all_reduced_words(&['a', 'b'], 0).len(), 1);
        assert_eq!(all_reduced_words(&['a', 'b'], 1).len(), 4);
        assert_eq!(all_reduced_words(&['a', 'b'], 2).len(), 12);
        assert_eq!(all_reduced_words(&['a', 'b'], 3).len(), 36);
        for w in all_reduced_words(&['a', 'b'], 3) {
            assert_eq!(w.len(), 3);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for seed in 0..10 {
            let p = GenParams {
                seed,
                ..GenParams::default()
            };
            let (m1, b1) = gen_instance(&p);
            let (m2, b2) = gen_instance(&p);
            assert_eq!(m1, m2);
            assert_eq!(b1, b2);
        }
    }

    #[test]
    fn generated_instances_are_valid() {
        for seed in 0..30 {
            let p = GenParams {
                seed,
                ..GenParams::default()
            };
            let (m, b, iota) = gen_instance_with_map(&p);
            check_compatible(&m, &b, &iota).unwrap();
            assert_eq!(b.reduce().unwrap(), b);
            b.min_tree(b.start()).unwrap();
        }
    }

    #[test]
    fn oracle_on_the_running_example() {
        let (m, b) = example();
        assert_eq!(
            brute_force_equiv(&m, &m, &b, 4).unwrap(),
            OracleOutcome::NoWitness { depth: 4 }
        );
        let m2 =
            parse_transducer(&EXAMPLE_LT.replace("rule q2 k -> ab", "rule q2 k -> a"), "test")
                .unwrap();
        match brute_force_equiv(&m, &m2, &b, 2).unwrap() {
            OracleOutcome::Witness { tree, left, right } => {
                assert_eq!(tree.display(m.input()).to_string(), "f(k,k)");
                assert_eq!(left.to_string(), "abab");
                assert_eq!(right.to_string(), "aba");
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        let empty = parse_dta("dta start h0\ndelta h0 g -> h0\n", m.input(), "test").unwrap();
        assert_eq!(
            brute_force_equiv(&m, &m, &empty, 4).unwrap(),
            OracleOutcome::EmptyDomain
        );
    }

    #[test]
    fn preserving_mutations_preserve() {
        let (m, b) = example();
        for seed in 0..25 {
            let m2 = mutate_preserving(&m, &b, seed).unwrap();
            assert_eq!(
                brute_force_equiv(&m, &m2, &b, 4).unwrap(),
                OracleOutcome::NoWitness { depth: 4 },
                "seed {seed}"
            );
        }
    }

    #[test]
    fn preserving_mutations_on_generated_instances() {
        for seed in 0..25 {
            let p = GenParams {
                seed,
                ..GenParams::default()
            };
            let (m, b) = gen_instance(&p);
            let m2 = mutate_preserving(&m, &b, seed.wrapping_mul(7) + 1).unwrap();
            assert_eq!(
                brute_force_equiv(&m, &m2, &b, 4).unwrap(),
                OracleOutcome::NoWitness { depth: 4 },
                "seed {seed}"
            );
        }
    }

    #[test]
    fn breaking_mutation_is_deterministic_and_touches_one_word() {
        let (m, _) = example();
        for seed in 0..10 {
            let m2 = mutate_breaking(&m, seed);
            assert_eq!(m2, mutate_breaking(&m, seed));
            let diff: usize = m
                .states()
                .flat_map(|q| m.input().symbols().map(move |f| (q, f)))
                .filter(|&(q, f)| m.rule(q, f) != m2.rule(q, f))
                .count();
            assert_eq!(diff, 1, "seed {seed}");
        }
    }
}
