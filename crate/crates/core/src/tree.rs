//! Ranked alphabets and input trees.

use std::fmt;

use crate::Error;

/// Index of a symbol in its [`RankedAlphabet`], in declaration order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SymbolId(pub usize);

/// A finite ranked alphabet. Declaration order doubles as the deterministic
/// tie-break order for enumeration and minimal witnesses.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RankedAlphabet {
    entries: Vec<(String, usize)>,
}

impl RankedAlphabet {
    pub fn new(entries: Vec<(String, usize)>) -> Result<RankedAlphabet, Error> {
        for (i, (name, _)) in entries.iter().enumerate() {
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::Invalid(format!("bad symbol name '{name}'")));
            }
            if entries[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::Invalid(format!("duplicate symbol '{name}'")));
            }
        }
        Ok(RankedAlphabet { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rank(&self, s: SymbolId) -> usize {
        self.entries[s.0].1
    }

    pub fn name(&self, s: SymbolId) -> &str {
        &self.entries[s.0].0
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.entries
            .iter()
            .position(|(n, _)| n == name)
            .map(SymbolId)
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.entries.len()).map(SymbolId)
    }

    pub fn has_nullary(&self) -> bool {
        self.entries.iter().any(|&(_, r)| r == 0)
    }
}

/// A tree over a ranked alphabet; the number of children always equals the
/// rank of the root symbol.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Tree {
    pub symbol: SymbolId,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(symbol: SymbolId) -> Tree {
        Tree {
            symbol,
            children: Vec::new(),
        }
    }

    /// Depth 0 for leaves, 1 + max child depth otherwise.
    pub fn depth(&self) -> usize {
        self.children
            .iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Parses the tree literal syntax `f(g(k),k)`; parentheses are omitted
    /// for rank-0 symbols.
    pub fn parse(src: &str, alphabet: &RankedAlphabet) -> Result<Tree, Error> {
        let mut chars = src.char_indices().peekable();
        let tree = parse_tree(src, &mut chars, alphabet)?;
        if let Some((pos, c)) = chars.next() {
            return Err(Error::Invalid(format!(
                "unexpected '{c}' at offset {pos} in tree literal"
            )));
        }
        Ok(tree)
    }

    pub fn display<'a>(&'a self, alphabet: &'a RankedAlphabet) -> TreeDisplay<'a> {
        TreeDisplay {
            tree: self,
            alphabet,
        }
    }
}

fn parse_tree(
    src: &str,
    chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>,
    alphabet: &RankedAlphabet,
) -> Result<Tree, Error> {
    let mut name = String::new();
    while let Some(&(_, c)) = chars.peek() {
        if c.is_ascii_alphanumeric() || c == '_' {
            name.push(c);
            chars.next();
        } else {
            break;
        }
    }
    let symbol = alphabet
        .lookup(&name)
        .ok_or_else(|| Error::Invalid(format!("unknown symbol '{name}' in tree literal")))?;
    let rank = alphabet.rank(symbol);
    let mut children = Vec::new();
    if chars.peek().map(|&(_, c)| c) == Some('(') {
        chars.next();
        loop {
            children.push(parse_tree(src, chars, alphabet)?);
            match chars.next().map(|(_, c)| c) {
                Some(',') => continue,
                Some(')') => break,
                _ => {
                    return Err(Error::Invalid(format!(
                        "unbalanced parentheses in tree literal '{src}'"
                    )))
                }
            }
        }
    }
    if children.len() != rank {
        return Err(Error::Invalid(format!(
            "symbol '{name}' has rank {rank} but {} children",
            children.len()
        )));
    }
    Ok(Tree { symbol, children })
}

pub struct TreeDisplay<'a> {
    tree: &'a Tree,
    alphabet: &'a RankedAlphabet,
}

impl fmt::Display for TreeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.alphabet.name(self.tree.symbol))?;
        if !self.tree.children.is_empty() {
            write!(f, "(")?;
            for (i, c) in self.tree.children.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", c.display(self.alphabet))?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}
