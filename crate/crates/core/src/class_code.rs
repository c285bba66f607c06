use std::fmt;

use crate::error::{Error, Result};

/// Number of source classes: digits, uppercase and lowercase letters.
pub const NUM_CLASSES: usize = 62;

/// A source character class. `0..=9` are digits, `10..=35` are `A..=Z` and
/// `36..=61` are `a..=z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassCode(u8);

impl ClassCode {
    pub fn new(value: u8) -> Result<Self> {
        if (value as usize) < NUM_CLASSES {
            Ok(ClassCode(value))
        } else {
            Err(Error::Invalid(format!("class code {value} out of range 0..62")))
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        let v = match c {
            '0'..='9' => c as u8 - b'0',
            'A'..='Z' => c as u8 - b'A' + 10,
            'a'..='z' => c as u8 - b'a' + 36,
            _ => return None,
        };
        Some(ClassCode(v))
    }

    /// Parses the hexadecimal ASCII code used for SD19 directory names, e.g. `"4a"` → `'J'`.
    pub fn from_hex(hex: &str) -> Result<Self> {
        let code = u8::from_str_radix(hex.trim(), 16)
            .map_err(|_| Error::Layout(format!("bad hexadecimal class code {hex:?}")))?;
        Self::from_char(code as char).ok_or_else(|| {
            Error::Layout(format!("hex code {hex:?} is not a digit or letter"))
        })
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn character(self) -> char {
        match self.0 {
            0..=9 => (b'0' + self.0) as char,
            10..=35 => (b'A' + self.0 - 10) as char,
            _ => (b'a' + self.0 - 36) as char,
        }
    }

    pub fn is_digit(self) -> bool {
        self.0 < 10
    }

    pub fn is_upper(self) -> bool {
        (10..36).contains(&self.0)
    }

    pub fn is_lower(self) -> bool {
        self.0 >= 36
    }

    pub fn all() -> impl Iterator<Item = ClassCode> {
        (0..NUM_CLASSES as u8).map(ClassCode)
    }
}

impl fmt::Display for ClassCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.character())
    }
}
