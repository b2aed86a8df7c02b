//! Expression trees, multi-tree individuals and their evaluation.
//!
//! Trees are stored as flat prefix sequences: each function node is followed
//! by its children's subtrees in order. This keeps subtree extraction and
//! splicing to slice operations and evaluation to a single forward pass.
//!
//! Text form is a parenthesised prefix expression, e.g.
//! `(if X138 (sigmoid X475) X475)`, with features written `X<index>` and
//! constants as decimals.

use std::fmt;

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Sigmoid inputs are clamped to this magnitude before exponentiation.
pub const SIGMOID_CLAMP: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Mul,
    Sum5,
    Sigmoid,
    Relu,
    Max,
    Min,
    If,
}

impl Op {
    pub const ALL: [Op; 8] = [
        Op::Add,
        Op::Mul,
        Op::Sum5,
        Op::Sigmoid,
        Op::Relu,
        Op::Max,
        Op::Min,
        Op::If,
    ];

    pub fn arity(self) -> usize {
        match self {
            Op::Sigmoid | Op::Relu => 1,
            Op::Add | Op::Mul | Op::Max | Op::Min => 2,
            Op::If => 3,
            Op::Sum5 => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Mul => "mul",
            Op::Sum5 => "sum5",
            Op::Sigmoid => "sigmoid",
            Op::Relu => "relu",
            Op::Max => "max",
            Op::Min => "min",
            Op::If => "if",
        }
    }

    pub fn from_name(name: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.name() == name)
    }

    /// Applies the operator to exactly `arity()` arguments.
    #[inline]
    pub fn apply(self, args: &[f64]) -> f64 {
        match self {
            Op::Add => args[0] + args[1],
            Op::Mul => args[0] * args[1],
            Op::Sum5 => args[0] + args[1] + args[2] + args[3] + args[4],
            Op::Sigmoid => sigmoid(args[0]),
            Op::Relu => args[0].max(0.0),
            Op::Max => args[0].max(args[1]),
            Op::Min => args[0].min(args[1]),
            Op::If => {
                if args[0] > 0.0 {
                    args[1]
                } else {
                    args[2]
                }
            }
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Feature(u32),
    Constant(f64),
    Func(Op),
}

impl Node {
    #[inline]
    pub fn arity(&self) -> usize {
        match self {
            Node::Func(op) => op.arity(),
            _ => 0,
        }
    }

    pub fn is_terminal(&self) -> bool {
        !matches!(self, Node::Func(_))
    }
}

/// How [`random_tree`] fills the levels above the maximum depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMethod {
    Full,
    Grow,
}

/// Probability that `grow` places a function (rather than a terminal) at a
/// level above its depth limit.
pub const GROW_FUNCTION_PROB: f64 = 0.5;

/// Parameters for random tree construction.
#[derive(Debug, Clone, Copy)]
pub struct TreeGen {
    /// Number of input features available as terminals.
    pub d: usize,
    /// Probability that a terminal is a feature rather than a constant.
    pub p_feat: f64,
}

impl TreeGen {
    pub fn terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> Node {
        if rng.random::<f64>() < self.p_feat {
            Node::Feature(rng.random_range(0..self.d) as u32)
        } else {
            Node::Constant(rng.random_range(-1.0..=1.0))
        }
    }

    fn function<R: Rng + ?Sized>(&self, rng: &mut R) -> Op {
        Op::ALL[rng.random_range(0..Op::ALL.len())]
    }

    fn build<R: Rng + ?Sized>(
        &self,
        method: InitMethod,
        level: usize,
        depth: usize,
        rng: &mut R,
        out: &mut Vec<Node>,
    ) {
        let func = level < depth
            && match method {
                InitMethod::Full => true,
                InitMethod::Grow => rng.random::<f64>() < GROW_FUNCTION_PROB,
            };
        if func {
            let op = self.function(rng);
            out.push(Node::Func(op));
            for _ in 0..op.arity() {
                self.build(method, level + 1, depth, rng, out);
            }
        } else {
            out.push(self.terminal(rng));
        }
    }

    /// Builds a tree whose depth lies in `[min_depth, max_depth]`. `grow`
    /// retries until the lower bound is met.
    pub fn tree<R: Rng + ?Sized>(
        &self,
        method: InitMethod,
        min_depth: usize,
        max_depth: usize,
        rng: &mut R,
    ) -> Tree {
        assert!(max_depth >= 1 && min_depth <= max_depth);
        loop {
            let mut nodes = Vec::new();
            self.build(method, 1, max_depth, rng, &mut nodes);
            let tree = Tree { nodes };
            if tree.depth() >= min_depth {
                return tree;
            }
        }
    }
}

/// Builds a random tree of the given depth. `full` trees have every leaf at
/// exactly `depth`; `grow` trees have depth in `[min(2, depth), depth]`.
pub fn random_tree<R: Rng + ?Sized>(
    method: InitMethod,
    depth: usize,
    gen: &TreeGen,
    rng: &mut R,
) -> Tree {
    gen.tree(method, depth.min(2), depth, rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Wraps a prefix sequence after checking it forms exactly one tree.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Tree> {
        let mut need: isize = 1;
        for (i, n) in nodes.iter().enumerate() {
            if need == 0 {
                return Err(Error::Expression {
                    offset: i,
                    message: "trailing nodes after a complete tree".into(),
                });
            }
            need += n.arity() as isize - 1;
        }
        if need != 0 {
            return Err(Error::Expression {
                offset: nodes.len(),
                message: "incomplete tree".into(),
            });
        }
        Ok(Tree { nodes })
    }

    pub fn feature(index: usize) -> Tree {
        Tree {
            nodes: vec![Node::Feature(index as u32)],
        }
    }

    pub fn constant(value: f64) -> Tree {
        Tree {
            nodes: vec![Node::Constant(value)],
        }
    }

    /// Applies `op` to the given subtrees.
    pub fn call(op: Op, children: Vec<Tree>) -> Tree {
        assert_eq!(children.len(), op.arity(), "wrong arity for {}", op.name());
        let mut nodes = vec![Node::Func(op)];
        for c in children {
            nodes.extend(c.nodes);
        }
        Tree { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One past the last node of the subtree rooted at `start`.
    pub fn subtree_end(&self, start: usize) -> usize {
        let mut need = 1usize;
        let mut i = start;
        while need > 0 {
            need = need + self.nodes[i].arity() - 1;
            i += 1;
        }
        i
    }

    pub fn subtree(&self, start: usize) -> &[Node] {
        &self.nodes[start..self.subtree_end(start)]
    }

    /// Level of every node, the root being level 1.
    pub fn levels(&self) -> Vec<usize> {
        let mut levels = Vec::with_capacity(self.nodes.len());
        let mut open: Vec<usize> = Vec::new();
        for n in &self.nodes {
            levels.push(open.len() + 1);
            match n.arity() {
                0 => {
                    while let Some(top) = open.last_mut() {
                        *top -= 1;
                        if *top == 0 {
                            open.pop();
                        } else {
                            break;
                        }
                    }
                }
                a => open.push(a),
            }
        }
        levels
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.levels().into_iter().max().unwrap_or(0)
    }

    /// Replaces the subtree rooted at `start` with `replacement`.
    pub fn replace_subtree(&self, start: usize, replacement: &[Node]) -> Tree {
        let end = self.subtree_end(start);
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - start) + replacement.len());
        nodes.extend_from_slice(&self.nodes[..start]);
        nodes.extend_from_slice(replacement);
        nodes.extend_from_slice(&self.nodes[end..]);
        Tree { nodes }
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Feature(j) => Some(*j as usize),
                _ => None,
            })
            .max()
    }

    /// Evaluates the tree on one instance.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut pos = 0;
        eval_at(&self.nodes, &mut pos, x)
    }

    /// Collapses every constant-only function subtree to its value.
    pub fn fold_constants(&self) -> Tree {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut pos = 0;
        fold_at(&self.nodes, &mut pos, &mut out);
        Tree { nodes: out }
    }

    /// Parses the parenthesised prefix form.
    pub fn parse(text: &str) -> Result<Tree> {
        let mut p = Parser { text, pos: 0 };
        let mut nodes = Vec::new();
        p.skip_ws();
        p.expr(&mut nodes)?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Tree { nodes })
    }
}

fn eval_at(nodes: &[Node], pos: &mut usize, x: &[f64]) -> f64 {
    let node = nodes[*pos];
    *pos += 1;
    match node {
        Node::Feature(j) => x[j as usize],
        Node::Constant(c) => c,
        Node::Func(op) => {
            let mut args = [0.0f64; 5];
            for a in args.iter_mut().take(op.arity()) {
                *a = eval_at(nodes, pos, x);
            }
            op.apply(&args)
        }
    }
}

/// Emits the folded subtree at `pos`; returns its value when input-free.
fn fold_at(nodes: &[Node], pos: &mut usize, out: &mut Vec<Node>) -> Option<f64> {
    let node = nodes[*pos];
    *pos += 1;
    match node {
        Node::Feature(_) => {
            out.push(node);
            None
        }
        Node::Constant(c) => {
            out.push(node);
            Some(c)
        }
        Node::Func(op) => {
            let start = out.len();
            out.push(node);
            let mut args = [0.0f64; 5];
            let mut constant = true;
            for a in args.iter_mut().take(op.arity()) {
                match fold_at(nodes, pos, out) {
                    Some(v) => *a = v,
                    None => constant = false,
                }
            }
            if constant {
                let v = op.apply(&args);
                out.truncate(start);
                out.push(Node::Constant(v));
                Some(v)
            } else {
                None
            }
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_at(nodes: &[Node], pos: &mut usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let node = nodes[*pos];
            *pos += 1;
            match node {
                Node::Feature(j) => write!(f, "X{j}"),
                Node::Constant(c) => write!(f, "{c}"),
                Node::Func(op) => {
                    write!(f, "({}", op.name())?;
                    for _ in 0..op.arity() {
                        f.write_str(" ")?;
                        write_at(nodes, pos, f)?;
                    }
                    f.write_str(")")
                }
            }
        }
        let mut pos = 0;
        write_at(&self.nodes, &mut pos, f)
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Expression {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn atom(&mut self) -> &str {
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
            .unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn expr(&mut self, out: &mut Vec<Node>) -> Result<()> {
        match self.text[self.pos..].chars().next() {
            None => Err(self.error("unexpected end of input")),
            Some(')') => Err(self.error("unexpected ')'")),
            Some('(') => {
                self.pos += 1;
                self.skip_ws();
                let at = self.pos;
                let name = self.atom();
                let op = Op::from_name(name).ok_or_else(|| Error::Expression {
                    offset: at,
                    message: format!("unknown function '{name}'"),
                })?;
                out.push(Node::Func(op));
                for _ in 0..op.arity() {
                    self.skip_ws();
                    self.expr(out)?;
                }
                self.skip_ws();
                if self.text[self.pos..].starts_with(')') {
                    self.pos += 1;
                    Ok(())
                } else {
                    Err(self.error(format!("expected ')' closing '{}'", op.name())))
                }
            }
            Some(_) => {
                let at = self.pos;
                let atom = self.atom();
                let node = if let Some(idx) = atom.strip_prefix('X') {
                    idx.parse::<u32>().map(Node::Feature).ok()
                } else {
                    atom.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Node::Constant)
                };
                node.map(|n| out.push(n)).ok_or_else(|| Error::Expression {
                    offset: at,
                    message: format!("invalid terminal '{atom}'"),
                })
            }
        }
    }
}

/// An `n x t` embedding, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    t: usize,
    data: Vec<f64>,
}

impl Embedding {
    pub fn new(n: usize, t: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * t);
        Embedding { n, t, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.t..(i + 1) * self.t]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.t.max(1))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// A multi-tree program: tree `j` computes output dimension `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub trees: Vec<Tree>,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(trees: Vec<Tree>) -> Self {
        Individual {
            trees,
            fitness: None,
        }
    }

    /// Tree `j` = feature `j`, so the embedding equals the input.
    pub fn identity(d: usize) -> Self {
        Individual::new((0..d).map(Tree::feature).collect())
    }

    pub fn t(&self) -> usize {
        self.trees.len()
    }

    pub fn fitness_or_zero(&self) -> f64 {
        self.fitness.unwrap_or(0.0)
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        self.trees.iter().filter_map(Tree::max_feature_index).max()
    }

    /// Fails naming the first feature index that does not exist in `d` inputs.
    pub fn check_features(&self, d: usize) -> Result<()> {
        match self.max_feature_index() {
            Some(index) if index >= d => Err(Error::FeatureOutOfRange { index, d }),
            _ => Ok(()),
        }
    }

    pub fn eval_instance(&self, x: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.eval(x)).collect()
    }

    /// Evaluates every row of a row-major `? x d` matrix.
    pub fn embed_rows(&self, features: &[f64], d: usize) -> Embedding {
        let t = self.t();
        let n = features.len() / d;
        let mut data = Vec::with_capacity(n * t);
        for row in features.chunks_exact(d) {
            data.extend(self.trees.iter().map(|tree| tree.eval(row)));
        }
        Embedding::new(n, t, data)
    }

    pub fn embed(&self, ds: &Dataset) -> Embedding {
        self.embed_rows(ds.features(), ds.d())
    }

    /// One prefix expression per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.trees {
            s.push_str(&t.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses one tree per non-empty line, skipping `#` comment lines.
    pub fn parse(text: &str) -> Result<Individual> {
        let trees = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(Tree::parse)
            .collect::<Result<Vec<_>>>()?;
        if trees.is_empty() {
            return Err(Error::Model("no trees found".into()));
        }
        Ok(Individual::new(trees))
    }
}
