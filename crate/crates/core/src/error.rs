use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("atom alphabet is empty")]
    EmptyAlphabet,
    #[error("at least 2 atoms are required, got {0}")]
    TooFewAtoms(usize),
    #[error("element {0} listed twice")]
    DuplicateElement(String),
    #[error("no covalence known for element {0}; supply an override")]
    UnknownCovalence(String),
    #[error("element {0} has zero covalence")]
    ZeroCovalence(String),
    #[error("atom bounds have {got} entries, expected {expected}")]
    MisalignedBounds { expected: usize, got: usize },
    #[error("lower bound exceeds upper bound for {0}")]
    InvertedBounds(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("coefficient magnitude overflow in group `{0}`")]
    Overflow(String),
    #[error("unknown variable x{0}")]
    UnknownVar(usize),
    #[error("unknown group `{0}`")]
    UnknownGroup(String),
    #[error("lexicographic rows differ in length ({0} vs {1})")]
    LexLength(usize, usize),
    #[error("symmetry breaking cannot be combined with substructure inclusion")]
    SymmetryWithInclusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("assignment has {got} values, model has {expected} variables")]
    Length { expected: usize, got: usize },
    #[error("atom {atom}: {active} active bits in the {block} block")]
    NotOneHot {
        atom: usize,
        block: &'static str,
        active: usize,
    },
    #[error("inconsistent bond flags between atoms {u} and {v}")]
    BondFlags { u: usize, v: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmartsError {
    #[error("empty pattern")]
    Empty,
    #[error("pattern ends unexpectedly")]
    UnexpectedEnd,
    #[error("unexpected `{token}` at position {pos}")]
    Unexpected { token: String, pos: usize },
    #[error("unsupported {what} `{token}` at position {pos}")]
    Unsupported {
        token: String,
        pos: usize,
        what: &'static str,
    },
    #[error("element {element} at position {pos} is not in the atom alphabet")]
    UnknownElement { element: String, pos: usize },
    #[error("bracket opened at position {pos} is never closed")]
    UnclosedBracket { pos: usize },
    #[error("branch opened at position {pos} is never closed")]
    UnclosedBranch { pos: usize },
    #[error("empty branch at position {pos}")]
    EmptyBranch { pos: usize },
    #[error("unmatched `)` at position {pos}")]
    UnmatchedParen { pos: usize },
    #[error("ring label {label} opened at position {pos} is never closed")]
    UnclosedRing { label: usize, pos: usize },
    #[error("ring label {label} at position {pos} closes with a different bond")]
    RingBondMismatch { label: usize, pos: usize },
    #[error("atoms {i} and {j} are bonded twice")]
    DuplicateBond { i: usize, j: usize },
    #[error("alternatives in the bracket at position {pos} carry different primitives")]
    NonUniformList { pos: usize },
    #[error("X primitive in the bracket at position {pos} needs an H count")]
    XWithoutH { pos: usize },
    #[error("inconsistent connection counts in the bracket at position {pos}")]
    Connectivity { pos: usize },
}
