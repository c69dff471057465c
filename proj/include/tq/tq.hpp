#ifndef TQ_TQ_HPP
#define TQ_TQ_HPP

#include "tq/arrival_model.hpp"
#include "tq/bandwidth.hpp"
#include "tq/golden.hpp"
#include "tq/order_stats.hpp"
#include "tq/queue_sim.hpp"
#include "tq/rare_event.hpp"
#include "tq/rate_path.hpp"
#include "tq/rate_pointwise.hpp"
#include "tq/rng.hpp"
#include "tq/sample_path.hpp"
#include "tq/service_model.hpp"

#endif  // TQ_TQ_HPP
