use std::fmt;

/// Homomorphic operation kinds that the engine records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Encrypt,
    Decrypt,
    Add,
    Sub,
    AddPlain,
    SubPlain,
    MultPlain,
    Rotate,
    Refresh,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpKind::Encrypt => "encrypt",
            OpKind::Decrypt => "decrypt",
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::AddPlain => "add_plain",
            OpKind::SubPlain => "sub_plain",
            OpKind::MultPlain => "mult_plain",
            OpKind::Rotate => "rotate",
            OpKind::Refresh => "refresh",
        };
        f.write_str(s)
    }
}

/// Ordered log of executed operation kinds.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpTrace {
    ops: Vec<OpKind>,
}

impl OpTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, op: OpKind) {
        self.ops.push(op);
    }

    pub fn ops(&self) -> &[OpKind] {
        &self.ops
    }

    pub fn count(&self, op: OpKind) -> usize {
        self.ops.iter().filter(|&&o| o == op).count()
    }

    pub fn rotations(&self) -> usize {
        self.count(OpKind::Rotate)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn clear(&mut self) {
        self.ops.clear();
    }
}
