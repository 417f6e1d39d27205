// Copyright 2026 The vrb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Index file container.
//!
//! ```text
//! "VRB1" | version: u32 LE | family tag: u8 | payload length: u64 LE | payload
//! ```
//!
//! The payload is the bincode encoding of the whole [`VectorIndex`], spec
//! and parameters included.

use std::fs;
use std::path::Path;

use super::{Family, IndexError, Result, VectorIndex};

pub const MAGIC: [u8; 4] = *b"VRB1";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 4 + 4 + 1 + 8;

pub fn encode_index(index: &VectorIndex) -> Result<Vec<u8>> {
    let payload = bincode::serialize(index).map_err(|e| IndexError::Corrupt(e.to_string()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(index.spec().family.tag());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn decode_index(bytes: &[u8]) -> Result<VectorIndex> {
    if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
        return Err(IndexError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(IndexError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let family = Family::from_tag(bytes[8])
        .ok_or_else(|| IndexError::Corrupt(format!("unknown family tag {}", bytes[8])))?;
    let len = u64::from_le_bytes(bytes[9..17].try_into().unwrap()) as usize;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != len {
        return Err(IndexError::Corrupt(format!(
            "payload is {} bytes, header says {len}",
            payload.len()
        )));
    }
    let index: VectorIndex =
        bincode::deserialize(payload).map_err(|e| IndexError::Corrupt(e.to_string()))?;
    if index.spec().family != family {
        return Err(IndexError::Corrupt("family tag does not match payload".into()));
    }
    Ok(index)
}

pub fn save_index(index: &VectorIndex, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_index(index)?)?;
    Ok(())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<VectorIndex> {
    decode_index(&fs::read(path)?)
}
