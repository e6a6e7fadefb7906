pub mod graph;
pub mod dfs;
pub mod codec;
pub mod recurrent;
pub mod pipeline;
