//! The 20 generic bond-rearrangement templates and registry file I/O.

use super::{parse_reaction, RxnError, SmartsReaction};

/// Template SMARTS by id (index + 1). Ids 1 to 10 make bonds or raise bond
/// order; id k + 10 undoes id k.
pub const TABLE1: [&str; 20] = [
    "[#6,#7,#8;h:1].[O,N,F,C:2]>>[#6,#7,#8:1][O,N,F,C:2]",
    "[O,N,C;h:1][O,N,C;h:2]>>[O,N,C:1]=[O,N,C:2]",
    "[N,C;h2:1][N,C;h2:2]>>[N,C:1]#[N,C:2]",
    "[C;h:1]=[N,C;h:2]>>[C:1]#[N,C:2]",
    "[#6,#7,#8;h:1]~[*:2]~[#6,#7,#8;h:3]>>[#6,#7,#8:1]1[*:2]~[#6,#7,#8:3]1",
    "[#6,#7,#8;h:1]~[*:2]~[*:4]~[#6,#7,#8;h:3]>>[#6,#7,#8:1]1[*:2]~[*:4]~[#6,#7,#8:3]1",
    "[#6,#7,#8;h:1]~[*:2]~[*:4]~[*:5]~[#6,#7,#8;h:3]>>[O,N,C:1]1[*:2]~[*:4]~[*:5]~[#6,#7,#8:3]1",
    "[#6,#7,#8;h:1]~[*:2]~[*:4]~[*:5]~[*:6]~[#6,#7,#8;h:3]>>[O,N,C:1]1[*:2]~[*:4]~[*:5]~[*:6]~[#6,#7,#8:3]1",
    "[#6,#7,#8;h:1]~[*:2]~[*:4]~[*:5]~[*:6]~[*:7]~[#6,#7,#8;h:3]>>[O,N,C:1]1[*:2]~[*:4]~[*:5]~[*:6]~[*:7]~[#6,#7,#8:3]1",
    "[#6,#7,#8;h:1]~[*:2]~[*:4]~[*:5]~[*:6]~[*:7]~[*:8]~[#6,#7,#8;h:3]>>[O,N,C:1]1[*:2]~[*:4]~[*:5]~[*:6]~[*:7]~[*:8]~[#6,#7,#8:3]1",
    "[#6,#7,#8:1][O,N,F,C:2]>>[#6,#7,#8;h:1]",
    "[O,N,C:1]=[O,N,C:2]>>[O,N,C;h:1][O,N,C;h:2]",
    "[N,C:1]#[N,C:2]>>[N,C;h2:1][N,C;h2:2]",
    "[C:1]#[N,C:2]>>[C;h:1]=[N,C;h:2]",
    "[#6,#7,#8:1]1[*:2]~[#6,#7,#8:3]1>>[#6,#7,#8;h:1]~[*:2]~[#6,#7,#8;h:3]",
    "[#6,#7,#8:1]1[*:2]~[*:4]~[#6,#7,#8:3]1>>[#6,#7,#8;h:1]~[*:2]~[*:4]~[#6,#7,#8;h:3]",
    "[O,N,C:1]1[*:2]~[*:4]~[*:5]~[#6,#7,#8:3]1>>[#6,#7,#8;h:1]~[*:2]~[*:4]~[*:5]~[#6,#7,#8;h:3]",
    "[O,N,C:1]1[*:2]~[*:4]~[*:5]~[*:6]~[#6,#7,#8:3]1>>[#6,#7,#8;h:1]~[*:2]~[*:4]~[*:5]~[*:6]~[#6,#7,#8;h:3]",
    "[O,N,C:1]1[*:2]~[*:4]~[*:5]~[*:6]~[*:7]~[#6,#7,#8:3]1>>[#6,#7,#8;h:1]~[*:2]~[*:4]~[*:5]~[*:6]~[*:7]~[#6,#7,#8;h:3]",
    "[O,N,C:1]1[*:2]~[*:4]~[*:5]~[*:6]~[*:7]~[*:8]~[#6,#7,#8:3]1>>[#6,#7,#8;h:1]~[*:2]~[*:4]~[*:5]~[*:6]~[*:7]~[*:8]~[#6,#7,#8;h:3]",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Forms a bond or raises a bond order (ids 1 to 10).
    Forward,
    /// Breaks a bond or lowers a bond order (ids 11 to 20).
    Reverse,
}

/// Id of the template undoing `id` among the built-in 20.
pub fn inverse_of(id: usize) -> Option<usize> {
    match id {
        1..=10 => Some(id + 10),
        11..=20 => Some(id - 10),
        _ => None,
    }
}

/// Ordered template list; ids start at 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrsRegistry {
    reactions: Vec<SmartsReaction>,
}

impl BrsRegistry {
    pub fn builtin() -> Self {
        BrsRegistry {
            reactions: TABLE1
                .iter()
                .map(|s| parse_reaction(s).expect("built-in template parses"))
                .collect(),
        }
    }

    /// One reaction SMARTS per line; line number is the id. A trailing
    /// newline is allowed, blank lines elsewhere are not.
    pub fn from_text(text: &str) -> Result<Self, RxnError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut reactions = Vec::new();
        for (i, line) in body.split('\n').enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                return Err(RxnError::Registry {
                    line: i + 1,
                    message: "blank line".into(),
                });
            }
            reactions.push(parse_reaction(line).map_err(|e| RxnError::Registry {
                line: i + 1,
                message: e.to_string(),
            })?);
        }
        Ok(BrsRegistry { reactions })
    }

    pub fn to_text(&self) -> String {
        self.reactions.iter().map(|r| format!("{}\n", r.raw_text())).collect()
    }

    pub fn get(&self, id: usize) -> Option<&SmartsReaction> {
        id.checked_sub(1).and_then(|i| self.reactions.get(i))
    }

    pub fn len(&self) -> usize {
        self.reactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reactions.is_empty()
    }

    /// `(id, reaction)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &SmartsReaction)> {
        self.reactions.iter().enumerate().map(|(i, r)| (i + 1, r))
    }

    pub fn direction(&self, id: usize) -> Option<Direction> {
        self.get(id)?;
        match id {
            1..=10 => Some(Direction::Forward),
            11..=20 => Some(Direction::Reverse),
            _ => None,
        }
    }

    /// A template given either as a numeric id or as reaction SMARTS.
    pub fn resolve(&self, spec: &str) -> Result<SmartsReaction, RxnError> {
        match spec.trim().parse::<usize>() {
            Ok(id) => self.get(id).cloned().ok_or(RxnError::UnknownTemplate(id)),
            Err(_) => parse_reaction(spec),
        }
    }
}

impl Default for BrsRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
