#pragma once

#include "nrkg/config.hpp"
#include "nrkg/data.hpp"
#include "nrkg/errors.hpp"
#include "nrkg/expansion.hpp"
#include "nrkg/field_io.hpp"
#include "nrkg/fit.hpp"
#include "nrkg/io.hpp"
#include "nrkg/klein_gordon.hpp"
#include "nrkg/profile.hpp"
#include "nrkg/spectral.hpp"
#include "nrkg/sweep.hpp"
