#pragma once

// Convenience include for the whole toolkit.

#include "weakkam/cohomology.hpp"
#include "weakkam/cost_system.hpp"
#include "weakkam/critical.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/io.hpp"
#include "weakkam/lagrangian.hpp"
#include "weakkam/lax_oleinik.hpp"
#include "weakkam/rational.hpp"
#include "weakkam/subsolution.hpp"
