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

//! Closed diverse itemset mining, XOR-cell pattern sampling and interactive
//! preference learning over transaction databases.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bitset;
pub mod data;
pub mod diversity;
pub mod engine;
pub mod preference;
pub mod session;
pub mod xor;

pub use bitset::BitSet;
pub use data::{Cover, DataError, Itemset, Pattern, TransactionDatabase};
pub use diversity::{DiversityConfig, History};
pub use engine::{Solver, VarState};
pub use session::{Session, SessionConfig};
pub use xor::XorSystem;
