// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qpm/builders.hpp"
#include "qpm/constants.hpp"
#include "qpm/error.hpp"
#include "qpm/medium.hpp"
#include "qpm/openquantum.hpp"
#include "qpm/phasespace.hpp"
#include "qpm/pseudoboson.hpp"
#include "qpm/response.hpp"
#include "qpm/selfconsistent.hpp"
#include "qpm/spectral.hpp"
#include "qpm/io.hpp"
#include "qpm/cli.hpp"
