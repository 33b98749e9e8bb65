package com.shop.product.controller;

import com.shop.product.service.ProductServiceImpl;
import org.springframework.stereotype.Controller;
import org.springframework.web.bind.annotation.*;

@Controller
@RequestMapping("api")
public class ProductController {

    @Autowired
    private ProductServiceImpl productService;

    @PostMapping("reserve")
    public void reserve(Long id) {
        productService.reserve(id);
    }

    @PutMapping({"/{id}", "/v3/{id}"})
    public void put(@PathVariable Long id) {
        productService.reserve(id);
    }

    @DeleteMapping("/{id}")
    void remove(Long id) {
    }
}
