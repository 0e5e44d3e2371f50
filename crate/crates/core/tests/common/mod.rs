#![allow(dead_code)]

pub mod ground;
pub mod random;
pub mod synthetic;
