use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the zero form has no content")]
    ZeroForm,
    #[error("invalid discriminant {0}: must be nonzero and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i128),
    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(i128, i128),
    #[error("transform is not unimodular (determinant {0})")]
    NotUnimodular(i128),
    #[error("128-bit overflow in {0}")]
    Overflow(&'static str),
    #[error("form {0} is not primitive")]
    Imprimitive(String),
    #[error("prime {p} does not split in discriminant {disc}")]
    InertPrime { p: u64, disc: i128 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("{0} is not squarefree")]
    NotSquarefree(u64),
    #[error("capacity exceeded: {what} = {value}, bound is {bound}")]
    Capacity {
        what: &'static str,
        value: i128,
        bound: i128,
    },
    #[error("m must be nonzero")]
    ZeroM,
    #[error("discriminant {0} is a perfect square")]
    SquareDiscriminant(i128),
    #[error("discriminant {0} is not a positive non-square")]
    NotRealQuadratic(i128),
    #[error("invalid Seifert matrix: {0}")]
    InvalidSeifert(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) trait CheckedExt<T> {
    fn or_overflow(self, what: &'static str) -> Result<T>;
}

impl<T> CheckedExt<T> for Option<T> {
    #[inline]
    fn or_overflow(self, what: &'static str) -> Result<T> {
        self.ok_or(Error::Overflow(what))
    }
}
