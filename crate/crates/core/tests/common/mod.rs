#![allow(dead_code)]

pub mod factory;
pub mod gen;
pub mod oracle;
