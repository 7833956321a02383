//! Complex literal grammar shared by polynomial strings and run configs.
//!
//! ```text
//! literal   := ws* term (sign ws* term)? ws*
//! term      := number | number? 'i'
//! number    := digits ('.' digits?)? exponent? | '.' digits exponent?
//! exponent  := ('e' | 'E') sign? digits
//! ```
//!
//! A leading sign is allowed on the first term. When two terms are present
//! the first must be real and the second imaginary (`1.5-2i`, `-1+i`).

use num_complex::Complex64;

use crate::error::{Error, Result};

struct Term {
    value: f64,
    imaginary: bool,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    base: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn err(&self, message: &str) -> Error {
        Error::parse(self.base + self.pos, message)
    }

    fn digits(&mut self) -> usize {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        self.pos - start
    }

    /// Scans one term, with a leading sign when `allow_sign` is set.
    fn term(&mut self, allow_sign: bool) -> Result<Term> {
        let start = self.pos;
        let mut negative = false;
        if allow_sign {
            match self.peek() {
                Some(b'+') => self.pos += 1,
                Some(b'-') => {
                    negative = true;
                    self.pos += 1;
                }
                _ => {}
            }
            self.skip_ws();
        }
        let num_start = self.pos;
        let int_digits = self.digits();
        let mut frac_digits = 0;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            frac_digits = self.digits();
        }
        let mantissa = int_digits + frac_digits;
        if mantissa == 0 && self.pos > num_start {
            return Err(self.err("lone decimal point"));
        }
        if mantissa > 0 && matches!(self.peek(), Some(b'e' | b'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.digits() == 0 {
                return Err(self.err("exponent without digits"));
            }
        }
        let num_end = self.pos;
        let imaginary = if self.peek() == Some(b'i') {
            self.pos += 1;
            true
        } else {
            false
        };
        if mantissa == 0 && !imaginary {
            self.pos = start;
            return Err(self.err("expected a number"));
        }
        let magnitude = if mantissa == 0 {
            1.0
        } else {
            // The scanned slice is ASCII by construction.
            let text = std::str::from_utf8(&self.bytes[num_start..num_end]).unwrap_or("");
            text.parse::<f64>()
                .map_err(|_| Error::parse(self.base + num_start, "malformed number"))?
        };
        if !magnitude.is_finite() {
            return Err(Error::parse(self.base + num_start, "number out of range"));
        }
        Ok(Term {
            value: if negative { -magnitude } else { magnitude },
            imaginary,
        })
    }
}

/// Parses a complex literal such as `0.1`, `-2i`, `1-0.5i` or `3e-2+i`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    parse_complex_at(text, 0)
}

pub(crate) fn parse_complex_at(text: &str, base: usize) -> Result<Complex64> {
    let mut cur = Cursor {
        bytes: text.as_bytes(),
        pos: 0,
        base,
    };
    cur.skip_ws();
    if cur.peek().is_none() {
        return Err(cur.err("empty complex literal"));
    }
    let first = cur.term(true)?;
    cur.skip_ws();
    let value = match cur.peek() {
        None => {
            if first.imaginary {
                Complex64::new(0.0, first.value)
            } else {
                Complex64::new(first.value, 0.0)
            }
        }
        Some(b'+' | b'-') => {
            if first.imaginary {
                return Err(cur.err("imaginary part must come last"));
            }
            let second = cur.term(true)?;
            if !second.imaginary {
                return Err(cur.err("second term must be imaginary"));
            }
            cur.skip_ws();
            if cur.peek().is_some() {
                return Err(cur.err("trailing characters"));
            }
            Complex64::new(first.value, second.value)
        }
        Some(_) => return Err(cur.err("unexpected character")),
    };
    Ok(value)
}

fn write_real(out: &mut String, x: f64) {
    use std::fmt::Write;
    let _ = write!(out, "{x}");
}

/// Canonical text form; `parse_complex(&format_complex(z)) == z` for finite `z`.
pub fn format_complex(z: Complex64) -> String {
    let mut out = String::new();
    let re_zero = z.re == 0.0 && z.re.is_sign_positive();
    let im_zero = z.im == 0.0 && z.im.is_sign_positive();
    match (re_zero, im_zero) {
        (true, true) => out.push('0'),
        (false, true) => write_real(&mut out, z.re),
        (true, false) => {
            write_real(&mut out, z.im);
            out.push('i');
        }
        (false, false) => {
            write_real(&mut out, z.re);
            if z.im.is_sign_negative() {
                out.push('-');
                write_real(&mut out, -z.im);
            } else {
                out.push('+');
                write_real(&mut out, z.im);
            }
            out.push('i');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn accepts_documented_forms() {
        assert_eq!(parse_complex("0.1").unwrap(), c(0.1, 0.0));
        assert_eq!(parse_complex("-1").unwrap(), c(-1.0, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1+2i").unwrap(), c(1.0, 2.0));
        assert_eq!(parse_complex("1-2.5i").unwrap(), c(1.0, -2.5));
        assert_eq!(parse_complex(" 1e-3 + 2E+1i ").unwrap(), c(1e-3, 20.0));
        assert_eq!(parse_complex("-1+i").unwrap(), c(-1.0, 1.0));
        assert_eq!(parse_complex(".5").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("3.").unwrap(), c(3.0, 0.0));
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "", " ", "+", "1+", "1+2", "2i+1", "1e", "1e+", ".", "1..2", "abc", "1+2i3", "1ii",
            "1e999", "--1",
        ] {
            assert!(parse_complex(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn canonical_form_round_trips() {
        for z in [
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, -1.0),
            c(0.1, 0.2),
            c(-3.25, -1e-7),
            c(1e-20, 5e20),
        ] {
            let text = format_complex(z);
            assert_eq!(parse_complex(&text).unwrap(), z, "{text}");
        }
    }
}
