# Algorithm services (graphs, gadgets, factors, regularity, random graphs, pipeline)
