//! Finitely presented groups: the text format, relator normalization, and
//! the AI-closure construction on presentations.
//!
//! The text format is line oriented:
//!
//! ```text
//! gens: a b
//! rels: a^4, b^2=a^2, a^b=a^-1
//! ```
//!
//! Words use `*` for products, `^k` for integer powers, `x^w` for
//! conjugation `w^-1 x w`, and `[x,y]` for the commutator `x^-1 y^-1 x y`.
//! A relation `x=y` is stored as the relator `x*y^-1`.

use crate::error::{Error, Result};
use crate::words::Word;

#[derive(Debug, Clone)]
pub struct Presentation {
    gens: Vec<String>,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(gens: Vec<String>, relators: Vec<Word>) -> Self {
        let mut names = gens.clone();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), gens.len(), "generator names must be unique");
        Presentation { gens, relators }
    }

    pub fn gens(&self) -> &[String] {
        &self.gens
    }

    pub fn gen_count(&self) -> usize {
        self.gens.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn push_relator(&mut self, w: Word) {
        if !w.is_identity() && !self.relators.contains(&w) {
            self.relators.push(w);
        }
    }

    /// Augment with the image of every relator under the free-group
    /// automorphism that inverts all generators.  Since that automorphism
    /// is an involution, the augmented normal closure is already invariant
    /// under it; `realize`-level order comparison is used by callers to
    /// confirm the fixed point.
    pub fn ai_augmented(&self) -> Presentation {
        let mut p = self.clone();
        for r in self.relators.clone() {
            p.push_relator(r.invert_generators());
        }
        p
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("gens: {}\n", self.gens.join(" "));
        s.push_str("rels: ");
        let rels: Vec<String> = self.relators.iter().map(|r| self.word_to_text(r)).collect();
        s.push_str(&rels.join(", "));
        s
    }

    fn word_to_text(&self, w: &Word) -> String {
        if w.is_identity() {
            return "1".into();
        }
        w.syllables()
            .iter()
            .map(|&(g, e)| {
                if e == 1 {
                    self.gens[g].clone()
                } else {
                    format!("{}^{}", self.gens[g], e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let mut gens: Option<Vec<String>> = None;
    let mut relators = Vec::new();
    let mut offset = 0usize;
    // `;` separates sections when everything is on one line
    let text = text.replace(';', "\n");
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            offset += line.len() + 1;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("gens:") {
            if gens.is_some() {
                return Err(Error::Parse { pos: offset, msg: "duplicate gens: line".into() });
            }
            let names: Vec<String> = rest.split_whitespace().map(|s| s.to_string()).collect();
            for n in &names {
                let mut chars = n.chars();
                let head_ok = chars.next().map(|c| c.is_ascii_alphabetic()).unwrap_or(false);
                if !head_ok || !n.chars().skip(1).all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(Error::Parse {
                        pos: offset,
                        msg: format!("bad generator name {n:?}"),
                    });
                }
            }
            let mut dedup = names.clone();
            dedup.sort();
            dedup.dedup();
            if dedup.len() != names.len() {
                return Err(Error::Parse { pos: offset, msg: "duplicate generator name".into() });
            }
            if names.is_empty() {
                return Err(Error::Parse { pos: offset, msg: "no generators".into() });
            }
            gens = Some(names);
        } else if let Some(rest) = trimmed.strip_prefix("rels:") {
            let gens = gens.as_ref().ok_or(Error::Parse {
                pos: offset,
                msg: "rels: before gens:".into(),
            })?;
            for chunk in split_top_level_commas(rest) {
                let chunk = chunk.trim();
                if chunk.is_empty() {
                    continue;
                }
                let w = parse_relator(chunk, gens, offset)?;
                if !w.is_identity() {
                    relators.push(w);
                }
            }
        } else {
            return Err(Error::Parse {
                pos: offset,
                msg: format!("expected gens: or rels: line, found {trimmed:?}"),
            });
        }
        offset += line.len() + 1;
    }
    let gens = gens.ok_or(Error::Parse { pos: 0, msg: "missing gens: line".into() })?;
    Ok(Presentation::new(gens, relators))
}

/// Split on commas that are not nested inside brackets or parentheses.
fn split_top_level_commas(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_relator(s: &str, gens: &[String], line_pos: usize) -> Result<Word> {
    // Top-level `x=y` means the relator x*y^-1.
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            '=' if depth == 0 => {
                let lhs = parse_word(&s[..i], gens, line_pos)?;
                let rhs = parse_word(&s[i + 1..], gens, line_pos)?;
                return Ok(lhs.concat(&rhs.inverse()));
            }
            _ => {}
        }
    }
    parse_word(s, gens, line_pos)
}

pub fn parse_word(s: &str, gens: &[String], line_pos: usize) -> Result<Word> {
    let mut p = WordParser { chars: s.as_bytes(), pos: 0, gens, line_pos };
    let w = p.word()?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.err("trailing input"));
    }
    Ok(w)
}

struct WordParser<'a> {
    chars: &'a [u8],
    pos: usize,
    gens: &'a [String],
    line_pos: usize,
}

impl<'a> WordParser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse { pos: self.line_pos + self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {:?}", c as char)))
        }
    }

    fn word(&mut self) -> Result<Word> {
        let mut w = self.term()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            w = w.concat(&self.term()?);
        }
        Ok(w)
    }

    fn term(&mut self) -> Result<Word> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            match self.peek() {
                Some(c) if c == b'-' || c.is_ascii_digit() => {
                    let k = self.integer()?;
                    return Ok(base.pow(k));
                }
                Some(b'(') => {
                    self.pos += 1;
                    let by = self.word()?;
                    self.eat(b')')?;
                    return Ok(base.conjugate(&by));
                }
                _ => {
                    let by = self.atom()?;
                    return Ok(base.conjugate(&by));
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Word> {
        match self.peek() {
            Some(b'1') => {
                self.pos += 1;
                Ok(Word::identity())
            }
            Some(b'(') => {
                self.pos += 1;
                let w = self.word()?;
                self.eat(b')')?;
                Ok(w)
            }
            Some(b'[') => {
                self.pos += 1;
                let x = self.word()?;
                self.eat(b',')?;
                let y = self.word()?;
                self.eat(b']')?;
                // [x,y] = x^-1 y^-1 x y
                Ok(x.inverse().concat(&y.inverse()).concat(&x).concat(&y))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.chars[start..self.pos]).unwrap();
                let idx = self
                    .gens
                    .iter()
                    .position(|g| g == name)
                    .ok_or_else(|| self.err(&format!("unknown generator {name:?}")))?;
                Ok(Word::generator(idx))
            }
            _ => Err(self.err("expected atom")),
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        if self.chars.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.chars[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("expected integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn klein_presentation() {
        let p = parse_presentation("gens: a b\nrels: a^2, b^2, [a,b]").unwrap();
        assert_eq!(p.gen_count(), 2);
        assert_eq!(p.relators().len(), 3);
        // [a,b] with a,b single letters has four letters.
        assert_eq!(p.relators()[2].letter_len(), 4);
    }

    #[test]
    fn relation_normalized_to_relator() {
        let p = parse_presentation("gens: a b\nrels: b^2=a^2").unwrap();
        // b^2 * a^-2
        assert_eq!(p.relators()[0].syllables(), &[(1, 2), (0, -2)]);
    }

    #[test]
    fn conjugation_exponent() {
        let p = parse_presentation("gens: a b\nrels: a^b=a^-1").unwrap();
        // b^-1 a b a
        assert_eq!(p.relators()[0].syllables(), &[(1, -1), (0, 1), (1, 1), (0, 1)]);
    }

    #[test]
    fn unknown_generator_rejected() {
        assert!(parse_presentation("gens: a\nrels: c^2").is_err());
    }

    #[test]
    fn parenthesized_conjugation_word() {
        let p = parse_presentation("gens: g h\nrels: h^(g*h)*h^2").unwrap();
        assert_eq!(p.relators().len(), 1);
    }
}
