//! Genotype to phenotype mapping.
//!
//! Standard left-most depth-first derivation: the left-most unexpanded
//! nonterminal with `k > 1` alternatives consumes the next codon `c` and is
//! rewritten with alternative `c mod k`. Single-alternative rules consume no
//! codon. When the codons run out the genome is reused from the start, up to
//! `max_wraps` times.
//!
//! Depth is checked after the derivation completes. A node ceiling aborts
//! derivations that balloon before the wrap budget is spent.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::grammar::{Grammar, Symbol};

pub const DEFAULT_MAX_WRAPS: usize = 1;
pub const DEFAULT_MAX_DEPTH: usize = 17;
pub const DEFAULT_MAX_NODES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genome {
    codons: Vec<u32>,
    codon_max: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenomeError {
    #[error("genome must contain at least one codon")]
    Empty,
    #[error("codon_max must be positive")]
    ZeroCodonMax,
    #[error("codon {value} at position {position} is not below codon_max {codon_max}")]
    CodonOutOfRange {
        position: usize,
        value: u32,
        codon_max: u32,
    },
}

impl Genome {
    pub fn new(codons: Vec<u32>, codon_max: u32) -> Result<Self, GenomeError> {
        if codon_max == 0 {
            return Err(GenomeError::ZeroCodonMax);
        }
        if codons.is_empty() {
            return Err(GenomeError::Empty);
        }
        if let Some((position, &value)) = codons.iter().enumerate().find(|(_, &c)| c >= codon_max)
        {
            return Err(GenomeError::CodonOutOfRange {
                position,
                value,
                codon_max,
            });
        }
        Ok(Genome { codons, codon_max })
    }

    /// Uses `u32::MAX` as the exclusive codon bound, so any codon is accepted
    /// except `u32::MAX` itself.
    pub fn from_codons(codons: Vec<u32>) -> Result<Self, GenomeError> {
        Self::new(codons, u32::MAX)
    }

    pub fn codons(&self) -> &[u32] {
        &self.codons
    }

    pub fn codon_max(&self) -> u32 {
        self.codon_max
    }

    pub fn len(&self) -> usize {
        self.codons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codons.is_empty()
    }

    /// Internal constructor for operators that already preserve the
    /// invariants (same bound, non-empty, every codon drawn below it).
    pub(crate) fn from_parts_unchecked(codons: Vec<u32>, codon_max: u32) -> Self {
        debug_assert!(!codons.is_empty() && codons.iter().all(|&c| c < codon_max));
        Genome { codons, codon_max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapLimits {
    pub max_wraps: usize,
    pub max_depth: usize,
    pub max_nodes: usize,
}

impl Default for MapLimits {
    fn default() -> Self {
        MapLimits {
            max_wraps: DEFAULT_MAX_WRAPS,
            max_depth: DEFAULT_MAX_DEPTH,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

impl MapLimits {
    pub fn new(max_wraps: usize, max_depth: usize) -> Self {
        MapLimits {
            max_wraps,
            max_depth,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationTree {
    pub node: Symbol,
    /// Present iff `node` is a nonterminal.
    pub production_index: Option<usize>,
    pub children: Vec<DerivationTree>,
    /// Depth of this node, the root being 1.
    pub depth: usize,
}

impl DerivationTree {
    pub fn leaf(text: &str, depth: usize) -> Self {
        DerivationTree {
            node: Symbol::Terminal(text.into()),
            production_index: None,
            children: Vec::new(),
            depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MappingStatus {
    Valid,
    InvalidDepth,
    InvalidWraps,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingResult {
    pub status: MappingStatus,
    pub tree: Option<DerivationTree>,
    pub phenotype: Option<String>,
    /// Total codons consumed, counting re-reads after a wrap.
    pub codons_used: usize,
    pub wraps_used: usize,
    /// Height of the derivation, also reported for invalid-depth results.
    pub depth: usize,
}

impl MappingResult {
    pub fn is_valid(&self) -> bool {
        self.status == MappingStatus::Valid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("derivation tree has an unexpanded nonterminal")]
    IncompleteTree,
}

struct ArenaNode {
    symbol: Symbol,
    production: Option<usize>,
    children: Vec<usize>,
    depth: usize,
}

pub fn map_genome(grammar: &Grammar, genome: &Genome, limits: MapLimits) -> MappingResult {
    let codons = genome.codons();
    let mut arena: Vec<ArenaNode> = Vec::new();
    arena.push(ArenaNode {
        symbol: Symbol::NonTerminal {
            name: grammar.start().into(),
            rule: 0,
        },
        production: None,
        children: Vec::new(),
        depth: 1,
    });
    let mut pending = alloc::vec![0usize];
    let mut phenotype = String::new();
    let mut next_codon = 0usize;
    let mut codons_used = 0usize;
    let mut wraps_used = 0usize;
    let mut max_depth_seen = 1usize;

    let invalid = |status, codons_used, wraps_used, depth| MappingResult {
        status,
        tree: None,
        phenotype: None,
        codons_used,
        wraps_used,
        depth,
    };

    while let Some(id) = pending.pop() {
        let rule_index = match &arena[id].symbol {
            Symbol::Terminal(t) => {
                phenotype.push_str(t);
                continue;
            }
            Symbol::NonTerminal { rule, .. } => *rule,
        };
        let rule = grammar.rule_at(rule_index);
        let k = rule.productions().len();
        let choice = if k == 1 {
            0
        } else {
            if next_codon == codons.len() {
                if wraps_used == limits.max_wraps {
                    return invalid(
                        MappingStatus::InvalidWraps,
                        codons_used,
                        wraps_used,
                        max_depth_seen,
                    );
                }
                wraps_used += 1;
                next_codon = 0;
            }
            let c = codons[next_codon];
            next_codon += 1;
            codons_used += 1;
            c as usize % k
        };

        let production = &rule.productions()[choice];
        if arena.len() + production.symbols().len() > limits.max_nodes {
            return invalid(
                MappingStatus::InvalidDepth,
                codons_used,
                wraps_used,
                max_depth_seen,
            );
        }
        let child_depth = arena[id].depth + 1;
        max_depth_seen = max_depth_seen.max(child_depth);
        let first = arena.len();
        for sym in production.symbols() {
            arena.push(ArenaNode {
                symbol: sym.clone(),
                production: None,
                children: Vec::new(),
                depth: child_depth,
            });
        }
        let last = arena.len();
        arena[id].production = Some(choice);
        arena[id].children = (first..last).collect();
        pending.extend((first..last).rev());
    }

    if max_depth_seen > limits.max_depth {
        return invalid(
            MappingStatus::InvalidDepth,
            codons_used,
            wraps_used,
            max_depth_seen,
        );
    }
    let tree = build_tree(&mut arena, 0);
    MappingResult {
        status: MappingStatus::Valid,
        tree: Some(tree),
        phenotype: Some(phenotype),
        codons_used,
        wraps_used,
        depth: max_depth_seen,
    }
}

// Recursion depth is bounded by the depth limit checked before this runs.
fn build_tree(arena: &mut [ArenaNode], id: usize) -> DerivationTree {
    let children_ids = core::mem::take(&mut arena[id].children);
    let children = children_ids.iter().map(|&c| build_tree(arena, c)).collect();
    let node = &mut arena[id];
    DerivationTree {
        node: core::mem::replace(&mut node.symbol, Symbol::Terminal(String::new())),
        production_index: node.production,
        children,
        depth: node.depth,
    }
}

pub fn phenotype_of(tree: &DerivationTree) -> Result<String, TreeError> {
    fn walk(t: &DerivationTree, out: &mut String) -> Result<(), TreeError> {
        match &t.node {
            Symbol::Terminal(s) => {
                out.push_str(s);
                Ok(())
            }
            Symbol::NonTerminal { .. } => {
                if t.production_index.is_none() || t.children.is_empty() {
                    return Err(TreeError::IncompleteTree);
                }
                t.children.iter().try_for_each(|c| walk(c, out))
            }
        }
    }
    let mut out = String::new();
    walk(tree, &mut out)?;
    Ok(out)
}

/// Height of the tree: 1 for a leaf, otherwise 1 + the tallest child.
pub fn tree_depth(tree: &DerivationTree) -> usize {
    1 + tree.children.iter().map(tree_depth).max().unwrap_or(0)
}
