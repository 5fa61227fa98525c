#pragma once

#include "mcsum/analysis.hpp"
#include "mcsum/chain.hpp"
#include "mcsum/error.hpp"
#include "mcsum/ginv.hpp"
#include "mcsum/io.hpp"
#include "mcsum/linalg.hpp"
#include "mcsum/oracle.hpp"
#include "mcsum/report.hpp"
#include "mcsum/residuals.hpp"
#include "mcsum/rng.hpp"
#include "mcsum/scan.hpp"
