//! Built-in desk-scale environments with known ground-truth causal graphs.

pub mod chaincraft;
pub mod dropout;
pub mod minicraft;

pub use chaincraft::{ChainCraft, ChainCraftConfig};
pub use dropout::DropoutWorld;
pub use minicraft::{MiniCraft, MiniCraftConfig};
