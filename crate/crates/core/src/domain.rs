//! The periodicity lattice: abstractions of output languages as the empty
//! set, a single word, a coset of a cyclic subgroup, or the whole group,
//! together with the per-state fixpoint analysis.

use std::fmt;

use crate::dta::Dta;
use crate::group::{Coset, GroupWord};
use crate::transducer::{check_compatible, CompatibleMap, Rhs, StateId, Transducer};
use crate::Error;

/// Abstraction of a set of reduced words. `Periodic` cosets are kept
/// canonical, so structural equality decides semantic equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AbstractLang {
    Empty,
    Singleton(GroupWord),
    Periodic(Coset),
    Top,
}

impl AbstractLang {
    pub fn is_empty(&self) -> bool {
        matches!(self, AbstractLang::Empty)
    }

    /// Subset order on the abstracted languages.
    pub fn leq(&self, other: &AbstractLang) -> bool {
        use AbstractLang::*;
        match (self, other) {
            (Empty, _) => true,
            (_, Top) => true,
            (Singleton(u), Singleton(v)) => u == v,
            (Singleton(u), Periodic(c)) => c.contains(u),
            (Periodic(c), Periodic(d)) => c == d,
            _ => false,
        }
    }

    /// Least upper bound.
    pub fn join(&self, other: &AbstractLang) -> Result<AbstractLang, Error> {
        use AbstractLang::*;
        Ok(match (self, other) {
            (Empty, x) | (x, Empty) => x.clone(),
            (Top, _) | (_, Top) => Top,
            (Singleton(g1), Singleton(g2)) => {
                if g1 == g2 {
                    Singleton(g1.clone())
                } else {
                    let p = g1.invert().concat(g2).primitive_root()?;
                    Periodic(Coset::canonical(g1, &p)?)
                }
            }
            (Singleton(g), Periodic(c)) | (Periodic(c), Singleton(g)) => {
                if c.contains(g) {
                    Periodic(c.clone())
                } else {
                    Top
                }
            }
            (Periodic(c1), Periodic(c2)) => {
                if c1 == c2 {
                    Periodic(c1.clone())
                } else {
                    Top
                }
            }
        })
    }

    /// Abstract concatenation of the underlying languages.
    pub fn star(&self, other: &AbstractLang) -> Result<AbstractLang, Error> {
        use AbstractLang::*;
        Ok(match (self, other) {
            (Empty, _) | (_, Empty) => Empty,
            (Top, _) | (_, Top) => Top,
            (Singleton(g1), Singleton(g2)) => Singleton(g1.concat(g2)),
            (Singleton(g1), Periodic(c)) => {
                let rep = g1.concat(c.rep());
                Periodic(Coset::canonical(&rep, c.period())?)
            }
            (Periodic(c), Singleton(g2)) => {
                let rep = c.rep().concat(g2);
                let period = g2.invert().concat(c.period()).concat(g2);
                Periodic(Coset::canonical(&rep, &period)?)
            }
            (Periodic(c1), Periodic(c2)) => {
                let conj = c2
                    .rep()
                    .invert()
                    .concat(c1.period())
                    .concat(c2.rep());
                if conj.solve_power(c2.period())?.is_some() {
                    let rep = c1.rep().concat(c2.rep());
                    Periodic(Coset::canonical(&rep, c2.period())?)
                } else {
                    Top
                }
            }
        })
    }
}

impl fmt::Display for AbstractLang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractLang::Empty => write!(f, "EMPTY"),
            AbstractLang::Singleton(w) => write!(f, "SINGLETON word={w}"),
            AbstractLang::Periodic(c) => {
                write!(f, "PERIODIC rep={} period={}", c.rep(), c.period())
            }
            AbstractLang::Top => write!(f, "TOP"),
        }
    }
}

/// Best abstraction of an explicit finite set of words.
pub fn alpha_of(words: &[GroupWord]) -> Result<AbstractLang, Error> {
    let first = match words.first() {
        None => return Ok(AbstractLang::Empty),
        Some(w) => w,
    };
    let second = match words.iter().find(|w| *w != first) {
        None => return Ok(AbstractLang::Singleton(first.clone())),
        Some(w) => w,
    };
    let p = first.invert().concat(second).primitive_root()?;
    for w in words {
        if first.invert().concat(w).solve_power(&p)?.is_none() {
            return Ok(AbstractLang::Top);
        }
    }
    Ok(AbstractLang::Periodic(Coset::canonical(first, &p)?))
}

/// One abstract value per transducer state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Analysis {
    values: Vec<AbstractLang>,
}

impl Analysis {
    pub fn get(&self, q: StateId) -> &AbstractLang {
        &self.values[q.0]
    }

    pub fn values(&self) -> &[AbstractLang] {
        &self.values
    }
}

fn round(
    m: &Transducer,
    b: &Dta,
    iota: &CompatibleMap,
    prev: &[AbstractLang],
) -> Result<Vec<AbstractLang>, Error> {
    let mut next = Vec::with_capacity(m.num_states());
    for q in m.states() {
        let mut acc = AbstractLang::Empty;
        for f in m.input().symbols() {
            if b.delta(iota.get(q), f).is_none() {
                continue;
            }
            let (lead, calls) = match m.rule(q, f) {
                Rhs::Bottom => continue,
                Rhs::Expr { lead, calls } => (lead, calls),
            };
            let mut val = AbstractLang::Singleton(lead.clone());
            for call in calls {
                val = val.star(&prev[call.state.0])?;
                val = val.star(&AbstractLang::Singleton(call.suffix.clone()))?;
            }
            acc = acc.join(&val)?;
        }
        next.push(acc);
    }
    Ok(next)
}

/// The first `rounds + 1` iterates of the abstract fixpoint, starting from
/// the all-empty assignment. Iterate `i` abstracts, per state `q`, the
/// outputs on domain trees of depth below `i`.
pub fn analyze_iterates(
    m: &Transducer,
    b: &Dta,
    iota: &CompatibleMap,
    rounds: usize,
) -> Result<Vec<Analysis>, Error> {
    check_compatible(m, b, iota)?;
    let mut out = vec![Analysis {
        values: vec![AbstractLang::Empty; m.num_states()],
    }];
    for _ in 0..rounds {
        let next = round(m, b, iota, &out.last().unwrap().values)?;
        out.push(Analysis { values: next });
    }
    Ok(out)
}

/// The least solution of the per-state constraint system, that is the exact
/// abstraction of each state's output language. The lattice has height three
/// per state, so the iteration must settle within `3n + 1` rounds.
pub fn analyze(m: &Transducer, b: &Dta, iota: &CompatibleMap) -> Result<Analysis, Error> {
    check_compatible(m, b, iota)?;
    let mut cur = vec![AbstractLang::Empty; m.num_states()];
    for _ in 0..(3 * m.num_states() + 1) {
        let next = round(m, b, iota, &cur)?;
        if next == cur {
            return Ok(Analysis { values: cur });
        }
        cur = next;
    }
    Err(Error::FixpointDiverged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmt::{parse_dta, parse_transducer};
    use crate::group::OutputAlphabet;
    use crate::harness::all_reduced_words;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ab() -> OutputAlphabet {
        OutputAlphabet::new(['a', 'b']).unwrap()
    }

    fn w(s: &str) -> GroupWord {
        GroupWord::parse(s, &ab()).unwrap()
    }

    fn sing(s: &str) -> AbstractLang {
        AbstractLang::Singleton(w(s))
    }

    fn peri(rep: &str, period: &str) -> AbstractLang {
        AbstractLang::Periodic(Coset::canonical(&w(rep), &w(period)).unwrap())
    }

    #[test]
    fn join_examples() {
        assert_eq!(sing("ab").join(&sing("ab")).unwrap(), sing("ab"));
        assert_eq!(sing("a").join(&sing("aba")).unwrap(), peri("a", "ba"));
        assert_eq!(sing("ab").join(&sing("abab")).unwrap(), peri("_", "ab"));
        assert_eq!(sing("ababa").join(&peri("a", "ba")).unwrap(), peri("a", "ba"));
        assert_eq!(sing("b").join(&peri("a", "ba")).unwrap(), AbstractLang::Top);
        assert_eq!(
            peri("a", "ba").join(&peri("a", "ba")).unwrap(),
            peri("a", "ba")
        );
        assert_eq!(
            peri("_", "ab").join(&peri("a", "ba")).unwrap(),
            AbstractLang::Top
        );
        assert_eq!(
            AbstractLang::Empty.join(&peri("a", "ba")).unwrap(),
            peri("a", "ba")
        );
        assert_eq!(AbstractLang::Top.join(&sing("a")).unwrap(), AbstractLang::Top);
    }

    #[test]
    fn star_examples() {
        assert_eq!(sing("ab").star(&sing("b-")).unwrap(), sing("a"));
        assert_eq!(sing("a").star(&peri("_", "ab")).unwrap(), peri("a", "ab"));
        // shifting a coset right conjugates its period
        assert_eq!(
            peri("_", "ab").star(&sing("ab")).unwrap(),
            peri("_", "ab")
        );
        assert_eq!(
            peri("a", "ba").star(&sing("b")).unwrap(),
            peri("_", "ab")
        );
        assert_eq!(
            peri("_", "ab").star(&peri("a", "ba")).unwrap(),
            peri("a", "ba")
        );
        assert_eq!(
            peri("_", "ab").star(&peri("_", "ba")).unwrap(),
            AbstractLang::Top
        );
        assert_eq!(
            AbstractLang::Top.star(&AbstractLang::Empty).unwrap(),
            AbstractLang::Empty
        );
        assert_eq!(
            AbstractLang::Top.star(&sing("a")).unwrap(),
            AbstractLang::Top
        );
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_of(&[]).unwrap(), AbstractLang::Empty);
        assert_eq!(alpha_of(&[w("ab"), w("ab")]).unwrap(), sing("ab"));
        assert_eq!(
            alpha_of(&[w("ab"), w("abab"), w("ababab")]).unwrap(),
            peri("_", "ab")
        );
        assert_eq!(
            alpha_of(&[w("a"), w("aba"), w("ababa")]).unwrap(),
            peri("a", "ba")
        );
        assert_eq!(
            alpha_of(&[w("a"), w("aba"), w("b")]).unwrap(),
            AbstractLang::Top
        );
    }

    // join and star must abstract exactly: applying them to abstractions of
    // explicit sets agrees with abstracting the union and the product.
    #[test]
    fn join_and_star_are_exact_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pool: Vec<GroupWord> = Vec::new();
        for len in 0..4 {
            pool.extend(all_reduced_words(&['a', 'b'], len));
        }
        // bias the pool toward periodic families so Periodic cases are hit
        for k in 1..4 {
            pool.push(w("ab").pow(k));
            pool.push(w("a").concat(&w("ba").pow(k)));
        }
        for _ in 0..2000 {
            let pick = |rng: &mut ChaCha8Rng| {
                let n = rng.gen_range(0..4);
                (0..n)
                    .map(|_| pool[rng.gen_range(0..pool.len())].clone())
                    .collect::<Vec<_>>()
            };
            let l1 = pick(&mut rng);
            let l2 = pick(&mut rng);
            let a1 = alpha_of(&l1).unwrap();
            let a2 = alpha_of(&l2).unwrap();

            let mut union = l1.clone();
            union.extend(l2.iter().cloned());
            assert_eq!(alpha_of(&union).unwrap(), a1.join(&a2).unwrap());

            let mut product = Vec::new();
            for x in &l1 {
                for y in &l2 {
                    product.push(x.concat(y));
                }
            }
            assert_eq!(alpha_of(&product).unwrap(), a1.star(&a2).unwrap());
        }
    }

    fn restricted_example() -> (Transducer, Dta, CompatibleMap) {
        let src = "\
alphabet f:2 g:1 k:0
output a b
axiom _ q0 _
rule q0 f -> _ q1:2 b q2:1 _
rule q0 g -> BOTTOM
rule q0 k -> BOTTOM
rule q1 f -> BOTTOM
rule q1 g -> ab q1:1 _
rule q1 k -> a
rule q2 f -> BOTTOM
rule q2 g -> ab q2:1 _
rule q2 k -> ab
";
        let m = parse_transducer(src, "test").unwrap();
        let b = parse_dta(
            "dta start h0\ndelta h0 f -> h1 h1\ndelta h1 g -> h1\ndelta h1 k ->\n",
            m.input(),
            "test",
        )
        .unwrap();
        let iota = crate::transducer::infer_compatible(&m, &b).unwrap();
        (m, b, iota)
    }

    #[test]
    fn analysis_of_running_example() {
        let (m, b, iota) = restricted_example();
        let analysis = analyze(&m, &b, &iota).unwrap();
        assert_eq!(*analysis.get(m.lookup_state("q0").unwrap()), peri("_", "ab"));
        assert_eq!(*analysis.get(m.lookup_state("q1").unwrap()), peri("a", "ba"));
        assert_eq!(*analysis.get(m.lookup_state("q2").unwrap()), peri("_", "ab"));
    }

    // iterate i must abstract exactly the outputs on trees of depth < i
    #[test]
    fn iterates_match_bounded_enumeration()
    {
        let (m, b, iota) = restricted_example();
        let iterates = analyze_iterates(&m, &b, &iota, 4).unwrap();
        for (i, analysis) in iterates.iter().enumerate() {
            for q in m.states() {
                let outputs: Vec<GroupWord> = b
                    .enum_trees(iota.get(q), i)
                    .iter()
                    .map(|t| m.eval_state(q, t, 0).unwrap())
                    .collect();
                assert_eq!(
                    alpha_of(&outputs).unwrap(),
                    *analysis.get(q),
                    "state {} at round {i}",
                    m.state_name(q)
                );
            }
        }
    }
}
