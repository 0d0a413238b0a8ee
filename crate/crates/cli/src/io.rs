// Copyright 2026 The divsample Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dataset files and threshold parsing.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use divsample_core::{DataError, TransactionDatabase};

/// Environment variable naming the default dataset directory.
pub const DATA_DIR_ENV: &str = "DIVSAMPLE_DATA_DIR";

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Data { path: PathBuf, source: DataError },
}

/// Reads a CP4IM-style transaction file.
pub fn load_database(path: &Path) -> Result<TransactionDatabase, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })?;
    TransactionDatabase::parse_cp4im(&text).map_err(|source| LoadError::Data {
        path: path.to_owned(),
        source,
    })
}

/// `path` itself when it exists, else `name` or `name.txt` under `dir`.
pub fn resolve_dataset(path: &Path, dir: Option<&Path>) -> PathBuf {
    if path.exists() {
        return path.to_owned();
    }
    if let Some(dir) = dir {
        for candidate in [dir.join(path), dir.join(path).with_extension("txt")] {
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_owned()
}

/// Minimum support, absolute or as a fraction of the database size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Theta {
    Absolute(usize),
    Relative(f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThetaError {
    #[error("theta {0:?} is neither a positive integer nor a fraction in (0, 1)")]
    Invalid(String),
    #[error("theta {theta} exceeds the {n_transactions} transactions")]
    TooLarge { theta: usize, n_transactions: usize },
}

impl Theta {
    pub fn from_f64(x: f64) -> Result<Self, ThetaError> {
        if x > 0.0 && x < 1.0 {
            Ok(Theta::Relative(x))
        } else if x >= 1.0 && x.fract() == 0.0 && x <= usize::MAX as f64 {
            Ok(Theta::Absolute(x as usize))
        } else {
            Err(ThetaError::Invalid(x.to_string()))
        }
    }

    /// Absolute threshold for a database of `n_transactions`.
    pub fn resolve(self, n_transactions: usize) -> Result<usize, ThetaError> {
        let theta = match self {
            Theta::Absolute(t) => t,
            Theta::Relative(x) => ((x * n_transactions as f64).ceil() as usize).max(1),
        };
        if theta > n_transactions {
            return Err(ThetaError::TooLarge {
                theta,
                n_transactions,
            });
        }
        Ok(theta)
    }
}

impl FromStr for Theta {
    type Err = ThetaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(t) = s.parse::<usize>() {
            return if t == 0 {
                Err(ThetaError::Invalid(s.into()))
            } else {
                Ok(Theta::Absolute(t))
            };
        }
        match s.parse::<f64>() {
            Ok(x) if x > 0.0 && x < 1.0 => Ok(Theta::Relative(x)),
            _ => Err(ThetaError::Invalid(s.into())),
        }
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theta::Absolute(t) => write!(f, "{t}"),
            Theta::Relative(x) => write!(f, "{x}"),
        }
    }
}
