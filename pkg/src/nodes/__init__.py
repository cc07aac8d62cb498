# Phase nodes for the absorbing pipeline
