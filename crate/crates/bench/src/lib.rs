//! Inputs shared by the benchmarks.

use idl_core::model::load_idl4oas;
use idl_core::OperationSpec;

pub const PLACES: &str = include_str!("../../core/tests/data/places.yaml");

/// The dependency document of every operation in the places fixture.
pub const PLACES_IDL: &str = "ZeroOrOne(radius, rankby=='distance');
IF rankby=='distance' THEN keyword OR name OR type;
maxprice >= minprice;
AllOrNone(location, radius);
Or(query, type);
maxprice >= minprice;
OnlyOne(maxheight, maxwidth);
IF strictbounds THEN location AND radius;
";

pub fn places(operation: &str) -> OperationSpec {
    load_idl4oas(PLACES, operation).expect("places fixture loads")
}
