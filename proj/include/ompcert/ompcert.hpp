#pragma once

// Umbrella header: sparse recovery by orthogonal matching pursuit, exact
// restricted isometry certification, recovery-guarantee evaluation, and
// the Monte Carlo experiment harness.

#include "ompcert/errors.hpp"
#include "ompcert/guarantees.hpp"
#include "ompcert/harness.hpp"
#include "ompcert/io.hpp"
#include "ompcert/least_squares.hpp"
#include "ompcert/omp.hpp"
#include "ompcert/oracle.hpp"
#include "ompcert/parallel.hpp"
#include "ompcert/rip.hpp"
#include "ompcert/rng.hpp"
#include "ompcert/sensing.hpp"
#include "ompcert/types.hpp"
