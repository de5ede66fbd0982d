//! Twist-word grammar:
//!
//! ```text
//! word     := twist*
//! twist    := base exponent?
//! base     := "d" INT | "g" INT | "t{" INT ("," INT)* "}"
//! exponent := "^" SIGNED_INT
//! ```
//!
//! Exponents are expanded on the spot. `t{i}` becomes δᵢ and `t{1,…,j}` becomes γⱼ; `g1` is δ₁.

use crate::error::{Error, Result};
use crate::words::{Sign, Surface, Twist, TwistWord};

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    /// 1-based column of the current character (or one past the end).
    fn column(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error<T>(&self, column: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: char) -> Result<()> {
        let col = self.column();
        match self.bump() {
            Some(c) if c == want => Ok(()),
            Some(c) => self.error(col, format!("expected '{want}', found '{c}'")),
            None => self.error(col, format!("expected '{want}', found end of input")),
        }
    }

    fn digits(&mut self) -> Result<(usize, String)> {
        let col = self.column();
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.pos += 1;
        }
        if s.is_empty() {
            let found = self
                .peek()
                .map_or("end of input".to_string(), |c| format!("'{c}'"));
            return self.error(col, format!("expected an integer, found {found}"));
        }
        Ok((col, s))
    }

    fn index(&mut self, n: u32) -> Result<u32> {
        let (col, s) = self.digits()?;
        let v: u32 = match s.parse() {
            Ok(v) => v,
            Err(_) => return self.error(col, format!("index {s} is too large")),
        };
        if v == 0 || v > n {
            return self.error(col, format!("index {v} out of range 1..={n}"));
        }
        Ok(v)
    }

    fn signed(&mut self) -> Result<i64> {
        let col = self.column();
        let neg = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let (_, s) = self.digits()?;
        match s.parse::<i64>() {
            Ok(v) => Ok(if neg { -v } else { v }),
            Err(_) => self.error(col, format!("exponent {s} is too large")),
        }
    }
}

fn base_twist(set: Vec<u32>) -> Twist {
    Twist::canonical(&set, Sign::Right).expect("set is nonempty")
}

pub fn parse_twist_word(text: &str, n: u32) -> Result<TwistWord> {
    let surface = Surface::new(n)?;
    let mut cur = Cursor::new(text);
    let mut letters = Vec::new();
    loop {
        cur.skip_ws();
        let col = cur.column();
        let Some(c) = cur.bump() else { break };
        let base = match c {
            'd' => base_twist(vec![cur.index(n)?]),
            'g' => {
                let j = cur.index(n)?;
                base_twist((1..=j).collect())
            }
            't' => {
                cur.expect('{')?;
                cur.skip_ws();
                if cur.peek() == Some('}') {
                    return cur.error(cur.column(), "empty braces");
                }
                let mut set = Vec::new();
                loop {
                    cur.skip_ws();
                    let icol = cur.column();
                    let i = cur.index(n)?;
                    if set.contains(&i) {
                        return cur.error(icol, format!("index {i} repeated"));
                    }
                    set.push(i);
                    cur.skip_ws();
                    let ccol = cur.column();
                    match cur.bump() {
                        Some(',') => continue,
                        Some('}') => break,
                        Some(other) => {
                            return cur
                                .error(ccol, format!("expected ',' or '}}', found '{other}'"))
                        }
                        None => return cur.error(ccol, "unclosed '{'"),
                    }
                }
                base_twist(set)
            }
            other => return cur.error(col, format!("expected 'd', 'g' or 't{{', found '{other}'")),
        };
        let mut power = 1i64;
        if cur.peek() == Some('^') {
            cur.bump();
            power = cur.signed()?;
        }
        let letter = if power < 0 { base.inverse() } else { base };
        for _ in 0..power.unsigned_abs() {
            letters.push(letter.clone());
        }
    }
    TwistWord::new(surface, letters)
}
