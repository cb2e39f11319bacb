//! A small full-stack quantum toolchain: assembly parsing, mapping and
//! scheduling for nearest-neighbour devices, state-vector simulation with
//! depolarizing noise, QUBO/Ising solvers with a QAOA loop, and Grover and
//! randomized-benchmarking kernels built on top.

pub mod ir;
pub mod simulator;
pub mod compiler;
pub mod optimizer;
pub mod seeding;
pub mod kernels;
