#![allow(dead_code)]

pub mod haar;
pub mod sl5;
