#pragma once

#include "tricorr/errors.hpp"
#include "tricorr/real.hpp"
#include "tricorr/params.hpp"
#include "tricorr/moments.hpp"
#include "tricorr/toeplitz.hpp"
#include "tricorr/garnier.hpp"
#include "tricorr/square_lattice.hpp"
#include "tricorr/verify.hpp"
