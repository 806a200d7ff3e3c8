/// Scalar type the numerical core is generic over.
///
/// Every real floating type nalgebra can factorize works here (f32, f64).
/// `FromPrimitive`/`ToPrimitive` bridge to the f64-based file formats.
pub trait Scalar:
    nalgebra::RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive
{
    /// Lossless-enough conversion from f64 literals and stored constants.
    fn from_f64_lit(x: f64) -> Self {
        num_traits::FromPrimitive::from_f64(x).expect("finite f64 converts")
    }

    /// Conversion toward the f64 file formats.
    fn to_f64_lit(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("real scalar fits f64")
    }
}

impl<T> Scalar for T where
    T: nalgebra::RealField + Copy + num_traits::FromPrimitive + num_traits::ToPrimitive
{
}
