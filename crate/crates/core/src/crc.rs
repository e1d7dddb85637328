//! Outer cyclic redundancy check.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// CRC generator over GF(2).
///
/// Serialized as binary coefficient strings, most significant first:
/// `polynomial` has `degree + 1` digits with a leading 1, `init` has `degree`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CrcRepr", into = "CrcRepr")]
pub struct CrcConfig {
    poly: Vec<u8>,
    init: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct CrcRepr {
    polynomial: String,
    #[serde(default)]
    init: String,
}

impl TryFrom<CrcRepr> for CrcConfig {
    type Error = Error;

    fn try_from(r: CrcRepr) -> Result<Self> {
        let cfg: CrcConfig = r.polynomial.parse()?;
        if r.init.is_empty() {
            return Ok(cfg);
        }
        cfg.with_init(&parse_bits(&r.init)?)
    }
}

impl From<CrcConfig> for CrcRepr {
    fn from(c: CrcConfig) -> Self {
        CrcRepr {
            polynomial: bits_to_string(&c.poly),
            init: bits_to_string(&c.init),
        }
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => invalid(format!("'{s}' is not a binary string")),
        })
        .collect()
}

fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

impl FromStr for CrcConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_bits(s.trim())?)
    }
}

impl fmt::Display for CrcConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.poly))
    }
}

impl CrcConfig {
    /// Generator from its `p + 1` coefficients, most significant first.
    pub fn new(poly: Vec<u8>) -> Result<Self> {
        if poly.first() != Some(&1) {
            return invalid("CRC generator must be monic (leading coefficient 1)");
        }
        if poly.iter().any(|&b| b > 1) {
            return invalid("CRC coefficients must be binary");
        }
        let degree = poly.len() - 1;
        Ok(Self {
            poly,
            init: vec![0; degree],
        })
    }

    /// No outer code: empty checksum, every word passes.
    pub fn none() -> Self {
        Self::new(vec![1]).expect("constant generator")
    }

    /// Default generator of degree `p`:
    /// 3 → x³+x+1, 5 → x⁵+x⁴+x²+1, 7 → x⁷+x⁶+x⁵+x²+1.
    pub fn default_for(p: usize) -> Result<Self> {
        match p {
            0 => Ok(Self::none()),
            3 => "1011".parse(),
            5 => "110101".parse(),
            7 => "11100101".parse(),
            _ => invalid(format!("no default CRC generator of degree {p}; give one explicitly")),
        }
    }

    pub fn with_init(mut self, init: &[u8]) -> Result<Self> {
        if init.len() != self.degree() || init.iter().any(|&b| b > 1) {
            return invalid(format!("CRC init must be {} binary digits", self.degree()));
        }
        self.init = init.to_vec();
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }
}

/// Remainder of `bits · x^p` modulo the generator (register preloaded with
/// `init`).
pub fn crc_compute(bits: &[u8], cfg: &CrcConfig) -> Vec<u8> {
    let p = cfg.degree();
    let mut reg = cfg.init.clone();
    for &b in bits {
        if p == 0 {
            break;
        }
        let feedback = (b & 1) ^ reg[0];
        reg.copy_within(1.., 0);
        reg[p - 1] = 0;
        if feedback == 1 {
            for (r, &g) in reg.iter_mut().zip(&cfg.poly[1..]) {
                *r ^= g;
            }
        }
    }
    reg
}

/// True iff the trailing `p` bits are the checksum of the leading ones.
pub fn crc_check(word: &[u8], cfg: &CrcConfig) -> bool {
    let p = cfg.degree();
    if word.len() < p {
        return false;
    }
    let (data, checksum) = word.split_at(word.len() - p);
    crc_compute(data, cfg) == checksum
}
