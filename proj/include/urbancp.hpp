#pragma once

#include "urbancp/error.hpp"
#include "urbancp/io.hpp"
#include "urbancp/linalg.hpp"
#include "urbancp/mask.hpp"
#include "urbancp/pipeline.hpp"
#include "urbancp/solver.hpp"
#include "urbancp/synthetic.hpp"
#include "urbancp/temporal.hpp"
#include "urbancp/tensor.hpp"
#include "urbancp/urban.hpp"
