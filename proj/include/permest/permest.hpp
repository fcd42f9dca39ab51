#pragma once

#include "permest/descriptor.hpp"
#include "permest/errors.hpp"
#include "permest/estimate.hpp"
#include "permest/exact.hpp"
#include "permest/matrix.hpp"
#include "permest/optics.hpp"
#include "permest/phase.hpp"
#include "permest/sample_space.hpp"
#include "permest/smallbias_binary.hpp"
#include "permest/smallbias_complex.hpp"
