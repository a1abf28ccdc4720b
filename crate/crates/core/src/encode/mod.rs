//! Character-level vocabulary and the model input layout: reactants and
//! template joined by separators with per-token segment types.

mod binary;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dataset::DatasetRecord;

pub use binary::{read_encoded, write_encoded, EncodedSet, Example};

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const SEP: u32 = 3;
pub const UNK: u32 = 4;
pub const SPECIALS: [&str; 5] = ["<pad>", "<bos>", "<eos>", "<sep>", "<unk>"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum TokenType {
    Pad = 0,
    Reactant = 1,
    Reaction = 2,
    Product = 3,
    Special = 4,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("no reactants")]
    NoReactants,
    #[error("template-based input needs a template")]
    MissingTemplate,
    #[error("template-free input must not carry a template")]
    UnexpectedTemplate,
    #[error("empty product")]
    EmptyProduct,
    #[error("token id {0} outside the vocabulary")]
    IdOutOfRange(u32),
    #[error("vocabulary line {line}: {message}")]
    Vocab { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    TemplateBased,
    TemplateFree,
}

impl FromStr for InputMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tb" => Ok(InputMode::TemplateBased),
            "tf" => Ok(InputMode::TemplateFree),
            _ => Err(format!("unknown mode '{s}' (expected tb or tf)")),
        }
    }
}

/// Specials at ids 0 to 4, then single characters in code point order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    chars: Vec<char>,
}

impl Vocab {
    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        let set: BTreeSet<char> = chars.into_iter().collect();
        Vocab {
            chars: set.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        SPECIALS.len() + self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, c: char) -> Option<u32> {
        self.chars
            .binary_search(&c)
            .ok()
            .map(|i| (i + SPECIALS.len()) as u32)
    }

    pub fn token(&self, id: u32) -> Option<String> {
        let i = id as usize;
        if i < SPECIALS.len() {
            Some(SPECIALS[i].to_string())
        } else {
            self.chars.get(i - SPECIALS.len()).map(|c| c.to_string())
        }
    }

    /// One token per line, line index = id.
    pub fn to_text(&self) -> String {
        let mut s: String = SPECIALS.iter().map(|t| format!("{t}\n")).collect();
        for c in &self.chars {
            s.push(*c);
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, EncodeError> {
        let lines: Vec<&str> = text.strip_suffix('\n').unwrap_or(text).split('\n').collect();
        let bad = |line: usize, message: &str| EncodeError::Vocab {
            line,
            message: message.to_string(),
        };
        for (i, s) in SPECIALS.iter().enumerate() {
            if lines.get(i) != Some(s) {
                return Err(bad(i + 1, "expected special token"));
            }
        }
        let mut chars = Vec::new();
        for (i, l) in lines.iter().enumerate().skip(SPECIALS.len()) {
            let mut it = l.chars();
            let (Some(c), None) = (it.next(), it.next()) else {
                return Err(bad(i + 1, "expected one character"));
            };
            if chars.last().is_some_and(|&p| p >= c) {
                return Err(bad(i + 1, "characters not in strictly increasing order"));
            }
            chars.push(c);
        }
        Ok(Vocab { chars })
    }
}

/// Every character of every reactant, template and product string.
pub fn build_vocab<'a>(records: impl IntoIterator<Item = &'a DatasetRecord>) -> Vocab {
    let mut chars = BTreeSet::new();
    for r in records {
        for s in r.reactants.iter().chain(&r.products).chain(std::iter::once(&r.template)) {
            chars.extend(s.chars());
        }
    }
    Vocab::from_chars(chars)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub type_ids: Vec<u8>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn push(&mut self, id: u32, ty: TokenType) {
        self.ids.push(id);
        self.type_ids.push(ty as u8);
    }

    /// Characters of `s`; returns how many fell back to UNK.
    fn push_text(&mut self, v: &Vocab, s: &str, ty: TokenType) -> usize {
        let mut unknown = 0;
        for c in s.chars() {
            let id = v.id(c).unwrap_or_else(|| {
                unknown += 1;
                UNK
            });
            self.push(id, ty);
        }
        unknown
    }

    /// Right-pad with PAD to `len` tokens.
    pub fn padded(&self, len: usize) -> TokenSequence {
        let mut s = self.clone();
        while s.len() < len {
            s.push(PAD, TokenType::Pad);
        }
        s
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.ids.iter().map(|i| i.to_string()).collect();
        f.write_str(&ids.join(" "))
    }
}

/// `r1 SEP r2 SEP ... [SEP template]`. The count is the number of
/// characters replaced by UNK.
pub fn encode_input(
    reactants: &[String],
    template: Option<&str>,
    v: &Vocab,
    mode: InputMode,
) -> Result<(TokenSequence, usize), EncodeError> {
    if reactants.is_empty() {
        return Err(EncodeError::NoReactants);
    }
    match (mode, template) {
        (InputMode::TemplateBased, None) => return Err(EncodeError::MissingTemplate),
        (InputMode::TemplateFree, Some(_)) => return Err(EncodeError::UnexpectedTemplate),
        _ => {}
    }
    let mut seq = TokenSequence::default();
    let mut unknown = 0;
    for (i, r) in reactants.iter().enumerate() {
        if i > 0 {
            seq.push(SEP, TokenType::Special);
        }
        unknown += seq.push_text(v, r, TokenType::Reactant);
    }
    if let Some(t) = template {
        seq.push(SEP, TokenType::Special);
        unknown += seq.push_text(v, t, TokenType::Reaction);
    }
    Ok((seq, unknown))
}

/// `BOS product EOS`.
pub fn encode_target(product: &str, v: &Vocab) -> Result<(TokenSequence, usize), EncodeError> {
    if product.is_empty() {
        return Err(EncodeError::EmptyProduct);
    }
    let mut seq = TokenSequence::default();
    seq.push(BOS, TokenType::Special);
    let unknown = seq.push_text(v, product, TokenType::Product);
    seq.push(EOS, TokenType::Special);
    Ok((seq, unknown))
}

/// Characters concatenated, specials dropped, SEP written as `sep`.
pub fn decode_with(t: &TokenSequence, v: &Vocab, sep: &str) -> Result<String, EncodeError> {
    let mut out = String::new();
    for &id in &t.ids {
        match id {
            SEP => out.push_str(sep),
            PAD | BOS | EOS | UNK => {}
            _ => out.push_str(&v.token(id).ok_or(EncodeError::IdOutOfRange(id))?),
        }
    }
    Ok(out)
}

pub fn decode(t: &TokenSequence, v: &Vocab) -> Result<String, EncodeError> {
    decode_with(t, v, "")
}

/// One example per (record, product), in record then product order.
/// Returns the set and the number of characters replaced by UNK.
pub fn encode_records(
    records: &[DatasetRecord],
    v: &Vocab,
    mode: InputMode,
) -> Result<(EncodedSet, usize), EncodeError> {
    let mut set = EncodedSet::default();
    let mut unknown = 0;
    for (i, r) in records.iter().enumerate() {
        let template = match mode {
            InputMode::TemplateBased => Some(r.template.as_str()),
            InputMode::TemplateFree => None,
        };
        let (source, u) = encode_input(&r.reactants, template, v, mode)?;
        unknown += u;
        for p in &r.products {
            let (target, u) = encode_target(p, v)?;
            unknown += u;
            set.examples.push(Example {
                record: i as u32,
                source: source.clone(),
                target,
            });
        }
    }
    Ok((set, unknown))
}
