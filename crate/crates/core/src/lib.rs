//! Discrete-event simulator for 5G network-slice admission control: a
//! scale-free substrate, a slice-request generator, a greedy embedder, the
//! profit/delay reward, a DQN admission agent, and the windowed event loop.

pub mod allocator;
pub mod engine;
pub mod policy;
pub mod reward;
pub mod slicegen;
pub mod substrate;
