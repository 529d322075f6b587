//! Rooted tree shapes and Newick text.
//!
//! A [`RootedTree`] stores, for every vertex, the ordered list of its
//! children. Labels and branch lengths are not kept: only the shape matters
//! for the polynomial encoding.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Structural errors when assembling a tree from raw child lists.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree has no vertices")]
    Empty,
    #[error("vertex id {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("vertex {0} has more than one parent")]
    MultipleParents(usize),
    #[error("root vertex {0} appears as a child")]
    RootHasParent(usize),
    #[error("vertex {0} is not reachable from the root")]
    Unreachable(usize),
}

/// A rooted tree shape.
///
/// Vertex ids are dense indices `0..vertex_count()`. They are stable for
/// the lifetime of the value and carry no meaning across processes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootedTree {
    children: Vec<Vec<usize>>,
    root: usize,
}

impl RootedTree {
    /// The one-vertex tree.
    pub fn leaf() -> Self {
        RootedTree { children: vec![Vec::new()], root: 0 }
    }

    /// Builds a tree from per-vertex child lists, checking that the child
    /// relation is a tree rooted at `root` that spans every vertex.
    pub fn from_children(children: Vec<Vec<usize>>, root: usize) -> Result<Self, TreeError> {
        let n = children.len();
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if root >= n {
            return Err(TreeError::VertexOutOfRange(root));
        }
        let mut has_parent = vec![false; n];
        for list in &children {
            for &c in list {
                if c >= n {
                    return Err(TreeError::VertexOutOfRange(c));
                }
                if c == root {
                    return Err(TreeError::RootHasParent(root));
                }
                if has_parent[c] {
                    return Err(TreeError::MultipleParents(c));
                }
                has_parent[c] = true;
            }
        }
        // Every non-root vertex has exactly one parent, so reaching all of
        // them from the root rules out cycles.
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(v) = stack.pop() {
            for &c in &children[v] {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(TreeError::Unreachable(v));
        }
        Ok(RootedTree { children, root })
    }

    /// A new tree whose root has the given subtrees as children, in order.
    pub fn join<I>(subtrees: I) -> Self
    where
        I: IntoIterator<Item = RootedTree>,
    {
        let mut children: Vec<Vec<usize>> = Vec::new();
        let mut roots = Vec::new();
        for sub in subtrees {
            let offset = children.len();
            roots.push(sub.root + offset);
            children.extend(
                sub.children
                    .into_iter()
                    .map(|list| list.into_iter().map(|c| c + offset).collect()),
            );
        }
        let root = children.len();
        children.push(roots);
        RootedTree { children, root }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn vertex_count(&self) -> usize {
        self.children.len()
    }

    /// Ordered children of `v`.
    ///
    /// Panics if `v` is not a vertex of this tree.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].is_empty()
    }

    /// Number of vertices with no children.
    pub fn leaf_count(&self) -> usize {
        self.children.iter().filter(|c| c.is_empty()).count()
    }

    /// True when every internal vertex has exactly two children.
    pub fn is_binary(&self) -> bool {
        self.children.iter().all(|c| c.is_empty() || c.len() == 2)
    }

    /// Vertices in post-order (children before parents, root last).
    pub fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.children.len());
        let mut stack = vec![(self.root, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                order.push(v);
            } else {
                stack.push((v, true));
                for &c in self.children[v].iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        order
    }

    /// A copy of the tree with every child list rearranged by `f`.
    ///
    /// `f` receives the vertex id and its child list and may permute it in
    /// place. Changing the set of children is not allowed and panics.
    pub fn reorder_children<F>(&self, mut f: F) -> Self
    where
        F: FnMut(usize, &mut [usize]),
    {
        let mut children = self.children.clone();
        for (v, list) in children.iter_mut().enumerate() {
            let mut before = list.clone();
            f(v, list);
            let mut after = list.clone();
            before.sort_unstable();
            after.sort_unstable();
            assert_eq!(before, after, "reorder_children must only permute children");
        }
        RootedTree { children, root: self.root }
    }
}

/// Number of leaves in `tree`.
pub fn leaf_count(tree: &RootedTree) -> usize {
    tree.leaf_count()
}

/// What went wrong while reading Newick text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NewickErrorKind {
    EmptyInput,
    UnexpectedChar(char),
    UnexpectedEnd,
    UnmatchedClose,
    UnclosedParen,
    InvalidBranchLength,
    TrailingInput,
}

/// A Newick parse failure at a character offset (zero-based, counted in
/// Unicode scalar values).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct NewickError {
    pub offset: usize,
    pub kind: NewickErrorKind,
}

impl fmt::Display for NewickErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NewickErrorKind::EmptyInput => f.write_str("empty input"),
            NewickErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            NewickErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            NewickErrorKind::UnmatchedClose => f.write_str("unbalanced ')'"),
            NewickErrorKind::UnclosedParen => f.write_str("unbalanced '('"),
            NewickErrorKind::InvalidBranchLength => f.write_str("invalid branch length"),
            NewickErrorKind::TrailingInput => f.write_str("trailing input after ';'"),
        }
    }
}

struct Cursor<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    offset: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c.is_some() {
            self.offset += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error(&self, kind: NewickErrorKind) -> NewickError {
        NewickError { offset: self.offset, kind }
    }

    fn unexpected(&mut self) -> NewickError {
        match self.peek() {
            Some(c) => self.error(NewickErrorKind::UnexpectedChar(c)),
            None => self.error(NewickErrorKind::UnexpectedEnd),
        }
    }

    fn skip_label(&mut self) {
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
        {
            self.bump();
        }
    }

    /// Optional `:length` suffix; the value is validated and dropped.
    fn skip_length(&mut self) -> Result<(), NewickError> {
        self.skip_ws();
        if self.peek() != Some(':') {
            return Ok(());
        }
        self.bump();
        self.skip_ws();
        let start = self.offset;
        let mut text = String::new();
        while let Some(c) = self
            .peek()
            .filter(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        {
            text.push(c);
            self.bump();
        }
        if text.parse::<f64>().is_err() {
            return Err(NewickError { offset: start, kind: NewickErrorKind::InvalidBranchLength });
        }
        Ok(())
    }

    /// Optional label followed by an optional branch length.
    fn skip_annotation(&mut self) -> Result<(), NewickError> {
        self.skip_ws();
        self.skip_label();
        self.skip_length()
    }
}

/// Parses one Newick tree terminated by `;`.
///
/// Leaf labels, internal labels (`[A-Za-z0-9_.-]*`) and `:length` suffixes
/// are accepted and discarded. Whitespace between tokens is ignored; only
/// whitespace may follow the terminating `;`.
pub fn parse_newick(text: &str) -> Result<RootedTree, NewickError> {
    let mut cur = Cursor { chars: text.chars().peekable(), offset: 0 };
    cur.skip_ws();
    if cur.peek().is_none() {
        return Err(cur.error(NewickErrorKind::EmptyInput));
    }

    let mut children: Vec<Vec<usize>> = Vec::new();
    // Child lists of the currently open '(' groups, innermost last.
    let mut open: Vec<Vec<usize>> = Vec::new();

    let root = 'outer: loop {
        // Start of a subtree.
        cur.skip_ws();
        if cur.peek() == Some('(') {
            cur.bump();
            open.push(Vec::new());
            continue;
        }
        match cur.peek() {
            Some(')') if open.is_empty() => return Err(cur.error(NewickErrorKind::UnmatchedClose)),
            None => return Err(cur.error(NewickErrorKind::UnexpectedEnd)),
            _ => {}
        }
        cur.skip_annotation()?;
        children.push(Vec::new());
        let mut node = children.len() - 1;

        // Close as many groups as the text closes after this subtree.
        loop {
            cur.skip_ws();
            let Some(group) = open.last_mut() else {
                break 'outer node;
            };
            match cur.peek() {
                Some(',') => {
                    cur.bump();
                    group.push(node);
                    break;
                }
                Some(')') => {
                    cur.bump();
                    let mut list = open.pop().unwrap_or_default();
                    list.push(node);
                    cur.skip_annotation()?;
                    children.push(list);
                    node = children.len() - 1;
                }
                Some(';') | None => return Err(cur.error(NewickErrorKind::UnclosedParen)),
                Some(_) => return Err(cur.unexpected()),
            }
        }
    };

    cur.skip_ws();
    match cur.peek() {
        Some(';') => {
            cur.bump();
        }
        Some(')') => return Err(cur.error(NewickErrorKind::UnmatchedClose)),
        _ => return Err(cur.unexpected()),
    }
    cur.skip_ws();
    if cur.peek().is_some() {
        return Err(cur.error(NewickErrorKind::TrailingInput));
    }
    Ok(RootedTree { children, root })
}

/// Unlabeled Newick for `tree`, e.g. `((,),(,));`.
pub fn to_newick(tree: &RootedTree) -> String {
    let mut out = String::with_capacity(3 * tree.vertex_count() + 1);
    // (vertex, index of the next child to emit)
    let mut stack = vec![(tree.root(), 0usize)];
    while let Some(top) = stack.last_mut() {
        let (v, next) = *top;
        let kids = tree.children(v);
        if kids.is_empty() {
            stack.pop();
            continue;
        }
        if next == kids.len() {
            out.push(')');
            stack.pop();
            continue;
        }
        out.push(if next == 0 { '(' } else { ',' });
        top.1 += 1;
        stack.push((kids[next], 0));
    }
    out.push(';');
    out
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_newick(self))
    }
}
