pub mod families;
pub mod reference;
