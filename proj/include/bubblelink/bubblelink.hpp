#pragma once

#include <bubblelink/channel.hpp>
#include <bubblelink/commands.hpp>
#include <bubblelink/config.hpp>
#include <bubblelink/dsp.hpp>
#include <bubblelink/error.hpp>
#include <bubblelink/metrics.hpp>
#include <bubblelink/modem.hpp>
#include <bubblelink/plot.hpp>
#include <bubblelink/presets.hpp>
#include <bubblelink/trace.hpp>
#include <bubblelink/trace_io.hpp>
