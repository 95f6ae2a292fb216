// batch layer: filled in after the solver lands
