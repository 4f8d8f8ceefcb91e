//! Exact arithmetic on reduced words in the free group over a finite
//! alphabet: reduction, concatenation, inversion, cyclic reduction,
//! primitive roots, power solving and canonical coset representatives.

use std::cmp::Ordering;
use std::fmt;

use crate::Error;

/// Orientation of a generator occurrence; `Negative` is the formal inverse.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// A generator or its formal inverse. The derived ordering is sign-then-symbol,
/// which fixes the tie-breaks used for canonical coset representatives.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SignedLetter {
    pub sign: Sign,
    pub gen: char,
}

impl SignedLetter {
    pub fn pos(gen: char) -> Self {
        SignedLetter {
            sign: Sign::Positive,
            gen,
        }
    }

    pub fn neg(gen: char) -> Self {
        SignedLetter {
            sign: Sign::Negative,
            gen,
        }
    }

    pub fn inverse(self) -> Self {
        SignedLetter {
            sign: self.sign.flip(),
            gen: self.gen,
        }
    }

    /// True iff the two letters cancel when adjacent.
    pub fn cancels(self, other: SignedLetter) -> bool {
        self.gen == other.gen && self.sign != other.sign
    }
}

impl fmt::Display for SignedLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Positive => write!(f, "{}", self.gen),
            Sign::Negative => write!(f, "{}-", self.gen),
        }
    }
}

/// The finite set of output generators. Words are validated against it when
/// parsed; the group operations themselves are alphabet-agnostic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OutputAlphabet {
    letters: Vec<char>,
}

impl OutputAlphabet {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Result<Self, Error> {
        let mut seen = Vec::new();
        for c in letters {
            if !c.is_ascii_alphabetic() {
                return Err(Error::Invalid(format!(
                    "output generator '{c}' is not an ascii letter"
                )));
            }
            if seen.contains(&c) {
                return Err(Error::Invalid(format!("duplicate output generator '{c}'")));
            }
            seen.push(c);
        }
        Ok(OutputAlphabet { letters: seen })
    }

    pub fn contains(&self, c: char) -> bool {
        self.letters.contains(&c)
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }
}

/// A reduced word over signed letters; the carrier of the free group.
/// The empty word is the neutral element.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GroupWord {
    letters: Vec<SignedLetter>,
}

impl GroupWord {
    pub fn empty() -> GroupWord {
        GroupWord::default()
    }

    /// Reduces an arbitrary letter sequence by a single left-to-right stack
    /// pass. Idempotent on already reduced input.
    pub fn reduce(raw: impl IntoIterator<Item = SignedLetter>) -> GroupWord {
        let mut stack: Vec<SignedLetter> = Vec::new();
        for l in raw {
            match stack.last() {
                Some(&top) if top.cancels(l) => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        GroupWord { letters: stack }
    }

    pub fn from_letters(letters: Vec<SignedLetter>) -> GroupWord {
        GroupWord::reduce(letters)
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[SignedLetter] {
        &self.letters
    }

    /// Group operation: concatenation followed by reduction. Cancellation can
    /// only happen at the seam, so it suffices to pop matching letters there.
    pub fn concat(&self, other: &GroupWord) -> GroupWord {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            match out.last() {
                Some(&top) if top.cancels(l) => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        GroupWord { letters: out }
    }

    pub fn invert(&self) -> GroupWord {
        GroupWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Splits `w` as `r⁻ · s · r` with `s` cyclically reduced and `r` maximal;
    /// returns `(r, s)`.
    pub fn cyclic_reduce(&self) -> (GroupWord, GroupWord) {
        let mut s = self.letters.clone();
        let mut r_rev: Vec<SignedLetter> = Vec::new();
        while s.len() >= 2 && s[0].cancels(s[s.len() - 1]) {
            let last = s.pop().unwrap();
            s.remove(0);
            r_rev.push(last);
        }
        r_rev.reverse();
        (GroupWord { letters: r_rev }, GroupWord { letters: s })
    }

    /// The primitive root `p` with `self = p^k` for some `k ≥ 1`. Cyclically
    /// reduce to `r⁻ s r`, take the string-primitive root of `s`, conjugate
    /// back by `r`.
    pub fn primitive_root(&self) -> Result<GroupWord, Error> {
        if self.is_empty() {
            return Err(Error::EmptyRoot);
        }
        let (r, s) = self.cyclic_reduce();
        let n = s.len();
        let mut root = s.clone();
        for d in 1..n {
            if n % d != 0 {
                continue;
            }
            if (d..n).all(|i| s.letters[i] == s.letters[i % d]) {
                root = GroupWord {
                    letters: s.letters[..d].to_vec(),
                };
                break;
            }
        }
        let mut out = r.invert().letters;
        out.extend_from_slice(&root.letters);
        out.extend_from_slice(&r.letters);
        Ok(GroupWord::reduce(out))
    }

    /// `self` raised to an integer power.
    pub fn pow(&self, k: i64) -> GroupWord {
        let base = if k < 0 { self.invert() } else { self.clone() };
        let mut out = GroupWord::empty();
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Returns `k` with `self = p^k` if one exists; unique since free groups
    /// are torsion-free.
    pub fn solve_power(&self, p: &GroupWord) -> Result<Option<i64>, Error> {
        if p.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        if self.is_empty() {
            return Ok(Some(0));
        }
        // p^k in reduced form is rp⁻ · sp^k · rp, so the length determines |k|.
        let (rp, sp) = p.cyclic_reduce();
        let need = self.len() as i64 - 2 * rp.len() as i64;
        if need <= 0 || need % sp.len() as i64 != 0 {
            return Ok(None);
        }
        let k = need / sp.len() as i64;
        if *self == p.pow(k) {
            Ok(Some(k))
        } else if *self == p.pow(-k) {
            Ok(Some(-k))
        } else {
            Ok(None)
        }
    }

    /// Shortest-then-lexicographic comparison, used for canonical choices.
    pub fn cmp_short_lex(&self, other: &GroupWord) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }

    /// Parses the word literal syntax: one ascii letter per generator, a
    /// trailing `-` for an inverse, `_` for the empty word.
    pub fn parse(token: &str, alphabet: &OutputAlphabet) -> Result<GroupWord, Error> {
        if token == "_" {
            return Ok(GroupWord::empty());
        }
        if token.is_empty() {
            return Err(Error::BadWordToken(token.to_string()));
        }
        let mut letters = Vec::new();
        let mut chars = token.chars().peekable();
        while let Some(c) = chars.next() {
            if !c.is_ascii_alphabetic() {
                return Err(Error::BadWordToken(token.to_string()));
            }
            if !alphabet.contains(c) {
                return Err(Error::UnknownLetter(c));
            }
            let sign = if chars.peek() == Some(&'-') {
                chars.next();
                Sign::Negative
            } else {
                Sign::Positive
            };
            letters.push(SignedLetter { sign, gen: c });
        }
        Ok(GroupWord::reduce(letters))
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "_");
        }
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A coset `rep·⟨period⟩` in canonical form: the period is primitive (with a
/// fixed direction) and the representative is the shortest coset member,
/// ties broken by the letter ordering.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Coset {
    rep: GroupWord,
    period: GroupWord,
}

impl Coset {
    /// Canonicalizes `g·⟨p⟩` for `p ≠ ε`.
    pub fn canonical(g: &GroupWord, p: &GroupWord) -> Result<Coset, Error> {
        let root = p.primitive_root()?;
        let inv = root.invert();
        let period = if root.cmp_short_lex(&inv) == Ordering::Greater {
            inv
        } else {
            root
        };
        // Any rep shorter than g satisfies |g·p^k| ≥ |k| − |g|, so scanning
        // |k| ≤ 2|g| + 1 covers all candidates.
        let mut best = g.clone();
        let mut fwd = g.clone();
        let mut bwd = g.clone();
        let pinv = period.invert();
        for _ in 0..(2 * g.len() + 1) {
            fwd = fwd.concat(&period);
            bwd = bwd.concat(&pinv);
            for cand in [&fwd, &bwd] {
                if cand.cmp_short_lex(&best) == Ordering::Less {
                    best = cand.clone();
                }
            }
        }
        Ok(Coset { rep: best, period })
    }

    pub fn rep(&self) -> &GroupWord {
        &self.rep
    }

    pub fn period(&self) -> &GroupWord {
        &self.period
    }

    pub fn contains(&self, w: &GroupWord) -> bool {
        self.rep
            .invert()
            .concat(w)
            .solve_power(&self.period)
            .expect("canonical period is non-empty")
            .is_some()
    }
}

impl fmt::Display for Coset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}<{}>", self.rep, self.period)
    }
}
