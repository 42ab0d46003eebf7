//! Text file formats. Each starts with a magic line naming the kind and
//! version, so a file handed to the wrong reader fails loudly.
//!
//! ```text
//! stuckat-image v1          stuckat-stored v1         stuckat-message v1
//! N 16 frozen 2             <profile JSON, one line>  N 5
//! a5f0                      N 16                      10110
//! 3                         a5f0
//! 9
//! ```
//!
//! Bit strings are hex, MSB-first per nibble, bit 0 first (see
//! [`BitVector::to_hex`]). Messages are written as `0`/`1` text because
//! they are what a user compares by eye.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::blockcodec::{MemoryImage, ParamProfile, SideChannelMetadata};
use crate::error::{Error, Result};
use crate::gf2::{BitVector, FrozenSet};
use crate::strongcodec::StrongProfile;

pub const IMAGE_MAGIC: &str = "stuckat-image v1";
pub const PROFILE_MAGIC: &str = "stuckat-profile v1";
pub const STORED_MAGIC: &str = "stuckat-stored v1";
pub const META_MAGIC: &str = "stuckat-meta v1";
pub const MESSAGE_MAGIC: &str = "stuckat-message v1";

/// A profile for either codec, as stored on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "codec", rename_all = "kebab-case")]
pub enum CodecProfile {
    Sidechannel(ParamProfile),
    Strong(Box<StrongProfile>),
}

impl CodecProfile {
    pub fn n(&self) -> usize {
        match self {
            CodecProfile::Sidechannel(p) => p.n,
            CodecProfile::Strong(p) => p.n,
        }
    }

    /// Rebuilds the profile from its inputs and checks every derived field.
    /// A hand-edited file with inconsistent constants is rejected.
    pub fn verify(&self) -> Result<()> {
        let rebuilt = match self {
            CodecProfile::Sidechannel(p) => CodecProfile::Sidechannel(p.to_builder().build()?),
            CodecProfile::Strong(p) => CodecProfile::Strong(Box::new(p.to_builder().build()?)),
        };
        if &rebuilt != self {
            return Err(Error::Format(
                "profile constants do not match their derivation".into(),
            ));
        }
        Ok(())
    }

    fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    fn from_json(line: &str) -> Result<Self> {
        let p: CodecProfile =
            serde_json::from_str(line).map_err(|e| Error::Format(format!("profile: {e}")))?;
        p.verify()?;
        Ok(p)
    }
}

struct Lines<'a> {
    kind: &'a str,
    inner: std::str::Lines<'a>,
}

impl<'a> Lines<'a> {
    fn open(text: &'a str, magic: &'a str) -> Result<Self> {
        let mut inner = text.lines();
        match inner.next() {
            Some(l) if l.trim_end() == magic => Ok(Lines { kind: magic, inner }),
            other => Err(Error::Format(format!(
                "expected {magic:?}, found {:?}",
                other.unwrap_or("")
            ))),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.inner
            .next()
            .map(str::trim_end)
            .ok_or_else(|| Error::Format(format!("{}: missing {what}", self.kind)))
    }

    // Parses "KEY value" pairs on one line, in the given order.
    fn fields(&mut self, keys: &[&str]) -> Result<Vec<usize>> {
        let line = self.next(&keys.join("/"))?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 * keys.len() {
            return Err(Error::Format(format!("{}: bad header {line:?}", self.kind)));
        }
        keys.iter()
            .enumerate()
            .map(|(i, k)| {
                if parts[2 * i] != *k {
                    return Err(Error::Format(format!(
                        "{}: expected {k} in {line:?}",
                        self.kind
                    )));
                }
                parts[2 * i + 1]
                    .parse()
                    .map_err(|_| Error::Format(format!("{}: bad number in {line:?}", self.kind)))
            })
            .collect()
    }

    fn finish(mut self) -> Result<()> {
        match self.inner.find(|l| !l.trim().is_empty()) {
            None => Ok(()),
            Some(l) => Err(Error::Format(format!(
                "{}: trailing content {l:?}",
                self.kind
            ))),
        }
    }
}

pub fn image_to_string(image: &MemoryImage) -> String {
    let mut s = format!(
        "{IMAGE_MAGIC}\nN {} frozen {}\n{}\n",
        image.len(),
        image.frozen.len(),
        image.cover.to_hex()
    );
    for i in image.frozen.indices() {
        s.push_str(&format!("{i}\n"));
    }
    s
}

pub fn image_from_str(text: &str) -> Result<MemoryImage> {
    let mut lines = Lines::open(text, IMAGE_MAGIC)?;
    let h = lines.fields(&["N", "frozen"])?;
    let (n, count) = (h[0], h[1]);
    let cover = BitVector::from_hex(lines.next("cover bits")?, n)?;
    let idx = (0..count)
        .map(|_| {
            lines
                .next("frozen index")?
                .parse::<usize>()
                .map_err(|e| Error::Format(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    lines.finish()?;
    MemoryImage::new(cover, FrozenSet::new(n, idx)?)
}

pub fn profile_to_string(profile: &CodecProfile) -> Result<String> {
    Ok(format!("{PROFILE_MAGIC}\n{}\n", profile.to_json()?))
}

pub fn profile_from_str(text: &str) -> Result<CodecProfile> {
    let mut lines = Lines::open(text, PROFILE_MAGIC)?;
    let p = CodecProfile::from_json(lines.next("profile")?)?;
    lines.finish()?;
    Ok(p)
}

/// What `decode` reads: the profile and the raw memory, nothing else.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredFile {
    pub profile: CodecProfile,
    pub stored: BitVector,
}

pub fn stored_to_string(file: &StoredFile) -> Result<String> {
    Ok(format!(
        "{STORED_MAGIC}\n{}\nN {}\n{}\n",
        file.profile.to_json()?,
        file.stored.len(),
        file.stored.to_hex()
    ))
}

pub fn stored_from_str(text: &str) -> Result<StoredFile> {
    let mut lines = Lines::open(text, STORED_MAGIC)?;
    let profile = CodecProfile::from_json(lines.next("profile")?)?;
    let n = lines.fields(&["N"])?[0];
    if n != profile.n() {
        return Err(Error::DimensionMismatch {
            expected: profile.n(),
            got: n,
        });
    }
    let stored = BitVector::from_hex(lines.next("stored bits")?, n)?;
    lines.finish()?;
    Ok(StoredFile { profile, stored })
}

pub fn meta_to_string(meta: &SideChannelMetadata, profile: &ParamProfile) -> String {
    let bits = meta.to_bits(profile);
    format!("{META_MAGIC}\nbits {}\n{}\n", bits.len(), bits.to_hex())
}

pub fn meta_from_str(text: &str, profile: &ParamProfile) -> Result<SideChannelMetadata> {
    let mut lines = Lines::open(text, META_MAGIC)?;
    let len = lines.fields(&["bits"])?[0];
    let bits = BitVector::from_hex(lines.next("metadata bits")?, len)?;
    lines.finish()?;
    SideChannelMetadata::from_bits(profile, &bits)
}

pub fn message_to_string(msg: &BitVector) -> String {
    format!("{MESSAGE_MAGIC}\nN {}\n{msg}\n", msg.len())
}

pub fn message_from_str(text: &str) -> Result<BitVector> {
    let mut lines = Lines::open(text, MESSAGE_MAGIC)?;
    let n = lines.fields(&["N"])?[0];
    // An empty message leaves an empty line, which `lines()` may drop at EOF.
    let body = if n == 0 {
        lines.inner.next().unwrap_or("").trim_end()
    } else {
        lines.next("message bits")?
    };
    let msg = BitVector::parse_binary(body)?;
    if msg.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: msg.len(),
        });
    }
    lines.finish()?;
    Ok(msg)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
