#pragma once

#include "datos/errors.hpp"
#include "datos/instances.hpp"
#include "datos/libsvm.hpp"
#include "datos/linalg.hpp"
#include "datos/linesearch.hpp"
#include "datos/netgraph.hpp"
#include "datos/problems.hpp"
#include "datos/solvers/centralized.hpp"
#include "datos/solvers/global_datos.hpp"
#include "datos/solvers/local_datos.hpp"
#include "datos/solvers/pg_extra.hpp"
#include "datos/solvers/reference.hpp"
#include "datos/harness/config.hpp"
#include "datos/harness/experiment.hpp"
#include "datos/harness/metrics.hpp"
#include "datos/harness/output.hpp"
#include "datos/harness/scenario.hpp"
#include "datos/harness/session.hpp"
#include "datos/harness/sweep.hpp"
#include "datos/selftest.hpp"
