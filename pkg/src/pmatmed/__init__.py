"""Priority Matroid Median: exact LP-rounding bicriteria approximations."""
