#pragma once

#include <gambel/samplers/diagnostics.hpp>
#include <gambel/samplers/gibbs.hpp>
#include <gambel/samplers/variates.hpp>
