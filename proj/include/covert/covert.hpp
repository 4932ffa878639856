#pragma once

#include "covert/belief.hpp"
#include "covert/bench.hpp"
#include "covert/distances.hpp"
#include "covert/errors.hpp"
#include "covert/fluent_set.hpp"
#include "covert/loader.hpp"
#include "covert/model_io.hpp"
#include "covert/observation.hpp"
#include "covert/oracle.hpp"
#include "covert/plangraph.hpp"
#include "covert/rational.hpp"
#include "covert/search.hpp"
#include "covert/strips.hpp"
#include "covert/variants.hpp"
