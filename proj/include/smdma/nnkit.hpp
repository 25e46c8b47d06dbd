#pragma once

#include "smdma/nnkit/adam.hpp"
#include "smdma/nnkit/grad_check.hpp"
#include "smdma/nnkit/loss.hpp"
#include "smdma/nnkit/model.hpp"
#include "smdma/nnkit/serialize.hpp"
#include "smdma/nnkit/tensor.hpp"
