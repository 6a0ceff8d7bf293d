#pragma once

#include "klnorm/types.hpp"
#include "klnorm/tickets.hpp"
#include "klnorm/compare.hpp"
#include "klnorm/objective.hpp"
#include "klnorm/certificate.hpp"
#include "klnorm/heap.hpp"
#include "klnorm/select.hpp"
#include "klnorm/window.hpp"
#include "klnorm/exact.hpp"
#include "klnorm/baselines.hpp"
#include "klnorm/oracle.hpp"
#include "klnorm/gen.hpp"
