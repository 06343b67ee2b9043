//! Text input of state vectors in ket notation.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := group | single
//! group  := '(' expr ')' '/sqrt(' number ')'   -- or a bare '(' expr ')'
//! single := [coeff ['*']] ket
//! coeff  := number | number 'i' | 'i' | '(' number ('+'|'-') number 'i' ')'
//! ket    := '|' digit{5} '>'
//! ```
//!
//! Digits follow the |q1 n1 nb q2 n2⟩ ordering. Coefficients may be written
//! as `0.5`, `0.8i` or `(1+2i)`; a parenthesized sum may carry a `/sqrt(K)`
//! divisor, as in `(|00100>+|01001>)/sqrt(2)`.

use std::sync::Arc;

use crate::fock::{FockError, OccupationLabel, SectorSpace, StateVector};
use crate::C64;

/// Parse a ket expression into a state on `space`.
///
/// With `normalize` the result is rescaled to unit norm; otherwise the
/// expression must already have unit norm within 1e-9.
pub fn parse_state_expr(
    expr: &str,
    space: &Arc<SectorSpace>,
    normalize: bool,
) -> Result<StateVector, FockError> {
    let mut parser = Parser {
        bytes: expr.as_bytes(),
        pos: 0,
    };
    let terms = parser.expr()?;
    parser.skip_ws();
    if parser.pos != parser.bytes.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    let mut amps = vec![C64::new(0.0, 0.0); space.dim()];
    for (coeff, label, pos) in terms {
        let idx = space.index_of(&label).ok_or(FockError::Parse {
            position: pos,
            message: format!("label |{label}⟩ is not in the state space"),
        })?;
        amps[idx] += coeff;
    }
    StateVector::from_amplitudes(Arc::clone(space), amps, normalize)
}

/// Render a state as a ket expression that `parse_state_expr` accepts.
///
/// Amplitudes are printed with shortest round-trip precision, so a
/// format/parse round trip reproduces them to within rounding.
pub fn format_state(state: &StateVector) -> String {
    let mut out = String::new();
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm() == 0.0 {
            continue;
        }
        if !out.is_empty() {
            out.push_str(" + ");
        }
        let label = state.space().label(idx);
        out.push_str(&format!(
            "({}{}{}i)|{label}>",
            amp.re,
            sign_of(amp.im),
            amp.im.abs()
        ));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn sign_of(x: f64) -> char {
    if x.is_sign_negative() {
        '-'
    } else {
        '+'
    }
}

type Term = (C64, OccupationLabel, usize);

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> FockError {
        FockError::Parse {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn expect(&mut self, b: u8) -> Result<(), FockError> {
        match self.peek() {
            Some(got) if got == b => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => {
                Err(self.error(format!("expected '{}', found '{}'", b as char, got as char)))
            }
            None => Err(self.error(format!("expected '{}', found end of input", b as char))),
        }
    }

    fn expr(&mut self) -> Result<Vec<Term>, FockError> {
        let mut terms = Vec::new();
        let mut sign = C64::new(1.0, 0.0);
        if let Some(b) = self.peek() {
            if b == b'+' || b == b'-' {
                self.pos += 1;
                if b == b'-' {
                    sign = -sign;
                }
            }
        }
        loop {
            for term in self.term()? {
                terms.push((sign * term.0, term.1, term.2));
            }
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    sign = C64::new(1.0, 0.0);
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = C64::new(-1.0, 0.0);
                }
                _ => return Ok(terms),
            }
        }
    }

    fn term(&mut self) -> Result<Vec<Term>, FockError> {
        match self.peek() {
            Some(b'(') => {
                // A '(' opens either a complex coefficient or a grouped sum;
                // a nested '|' marks the group.
                if self.paren_contains_ket() {
                    self.group()
                } else {
                    self.single()
                }
            }
            Some(_) => self.single(),
            None => Err(self.error("expected a term, found end of input")),
        }
    }

    fn paren_contains_ket(&mut self) -> bool {
        self.skip_ws();
        let mut depth = 0usize;
        for &b in &self.bytes[self.pos..] {
            match b {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return false;
                    }
                }
                b'|' => return true,
                _ => {}
            }
        }
        false
    }

    fn group(&mut self) -> Result<Vec<Term>, FockError> {
        self.expect(b'(')?;
        let inner = self.expr()?;
        self.expect(b')')?;
        let divisor = if self.peek() == Some(b'/') {
            self.pos += 1;
            self.sqrt_divisor()?
        } else {
            1.0
        };
        Ok(inner
            .into_iter()
            .map(|(c, label, pos)| (c / divisor, label, pos))
            .collect())
    }

    fn sqrt_divisor(&mut self) -> Result<f64, FockError> {
        self.skip_ws();
        if self.bytes[self.pos..].starts_with(b"sqrt") {
            self.pos += 4;
            self.expect(b'(')?;
            let k = self.number()?;
            self.expect(b')')?;
            if k <= 0.0 {
                return Err(self.error("sqrt divisor must be positive"));
            }
            Ok(k.sqrt())
        } else {
            // plain numeric divisor
            let k = self.number()?;
            if k == 0.0 {
                return Err(self.error("division by zero"));
            }
            Ok(k)
        }
    }

    fn single(&mut self) -> Result<Vec<Term>, FockError> {
        let coeff = match self.peek() {
            Some(b'|') => C64::new(1.0, 0.0),
            Some(_) => {
                let c = self.coefficient()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                }
                c
            }
            None => return Err(self.error("expected a term, found end of input")),
        };
        let pos = self.pos;
        let label = self.ket()?;
        Ok(vec![(coeff, label, pos)])
    }

    fn coefficient(&mut self) -> Result<C64, FockError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let re = self.number()?;
                let sign = match self.bump() {
                    Some(b'+') => 1.0,
                    Some(b'-') => -1.0,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected '+' or '-' in complex coefficient"));
                    }
                };
                let im = self.number()?;
                self.expect(b'i')?;
                self.expect(b')')?;
                Ok(C64::new(re, sign * im))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(C64::new(0.0, 1.0))
            }
            Some(_) => {
                let value = self.number()?;
                if self.peek() == Some(b'i') {
                    self.pos += 1;
                    Ok(C64::new(0.0, value))
                } else {
                    Ok(C64::new(value, 0.0))
                }
            }
            None => Err(self.error("expected a coefficient, found end of input")),
        }
    }

    fn number(&mut self) -> Result<f64, FockError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.bytes;
        let mut end = self.pos;
        if end < bytes.len() && (bytes[end] == b'+' || bytes[end] == b'-') {
            end += 1;
        }
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        // exponent, keeping a trailing 'i' out of it
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut exp_end = end + 1;
            if exp_end < bytes.len() && (bytes[exp_end] == b'+' || bytes[exp_end] == b'-') {
                exp_end += 1;
            }
            let digits_start = exp_end;
            while exp_end < bytes.len() && bytes[exp_end].is_ascii_digit() {
                exp_end += 1;
            }
            if exp_end > digits_start {
                end = exp_end;
            }
        }
        if end == start {
            return Err(self.error("expected a number"));
        }
        let text = std::str::from_utf8(&bytes[start..end]).expect("ascii slice");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = end;
                Ok(v)
            }
            _ => Err(self.error(format!("invalid number '{text}'"))),
        }
    }

    fn ket(&mut self) -> Result<OccupationLabel, FockError> {
        self.expect(b'|')?;
        let mut digits = [0u8; 5];
        for slot in &mut digits {
            match self.bump() {
                Some(b) if b.is_ascii_digit() => *slot = b - b'0',
                Some(b) => {
                    self.pos -= 1;
                    return Err(self.error(format!(
                        "expected an occupation digit, found '{}'",
                        b as char
                    )));
                }
                None => return Err(self.error("expected an occupation digit, found end of input")),
            }
        }
        self.expect(b'>')?;
        Ok(OccupationLabel::from_digits(digits))
    }
}
