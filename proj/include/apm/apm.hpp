#pragma once

#include "apm/data.hpp"
#include "apm/harness.hpp"
#include "apm/infotheory.hpp"
#include "apm/logreg.hpp"
#include "apm/numkit.hpp"
#include "apm/posterior.hpp"
#include "apm/selection.hpp"
